#include "magtube/structure.hpp"

#include <cmath>

#include "magtube/linalg.hpp"
#include "magtube/parallel.hpp"

namespace magtube {

LagrangianFrame frame_at(const ChartedGeometry& geo, const PhasePoint& z, const ComplexTime& t,
                         const FrameOptions& opts) {
  if (!z.is_real()) throw std::invalid_argument("frame_at: base point must be real");
  t.check_in_disk(opts.flow.disk_radius);
  const int n = geo.dim();

  FlowOptions back = opts.flow;
  back.with_jacobian = false;
  back.verify_path = false;
  const FlowState w = flow_complex(geo, z, t.negated(), back);

  FlowOptions fwd = opts.flow;
  fwd.with_jacobian = true;
  fwd.verify_path = false;
  const FlowState s = flow_along(geo, w.z, t, fwd);

  LagrangianFrame frame;
  frame.base = z;
  frame.time = t.target();
  frame.F = s.jac.rightCols(n);
  if (opts.orthonormalize) frame.F = linalg::orthonormalize_columns(frame.F);
  return frame;
}

double lagrangian_residual(const ChartedGeometry& geo, const LagrangianFrame& frame) {
  const CMat om = twisted_form_matrix(geo, frame.base.x);
  return (frame.F.transpose() * om * frame.F).cwiseAbs().maxCoeff();
}

double transversality_check(const LagrangianFrame& frame) {
  const CMat q = linalg::orthonormalize_columns(frame.F);
  const Eigen::Index n = q.cols();
  CMat s(q.rows(), 2 * n);
  s << q, q.conjugate();
  return linalg::smallest_singular_value(s);
}

CMat positivity_form(const ChartedGeometry& geo, const PhasePoint& base, const CMat& F) {
  const CMat om = twisted_form_matrix(geo, base.x);
  return -kI * (F.transpose() * om * F.conjugate());
}

ACSPointData assemble_J(const ChartedGeometry& geo, const LagrangianFrame& frame,
                        double transversality_tol) {
  ACSPointData out;
  out.base = frame.base;
  out.time = frame.time;
  out.transversality = transversality_check(frame);
  if (!(out.transversality > transversality_tol)) {
    throw IllConditionedFrame("assemble_J: frame meets its conjugate (transversality " +
                              std::to_string(out.transversality) + ")");
  }
  const CMat q = linalg::orthonormalize_columns(frame.F);
  const Eigen::Index n = q.cols();
  CMat s(q.rows(), 2 * n);
  s << q, q.conjugate();
  CVec d(2 * n);
  d.head(n).setConstant(kI);
  d.tail(n).setConstant(-kI);
  const CMat m = s * d.asDiagonal() * s.partialPivLu().inverse();
  out.J = m.real();
  out.imag_residual = m.imag().cwiseAbs().maxCoeff();

  CMat h = positivity_form(geo, frame.base, q);
  h = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  out.positivity_spectrum = es.eigenvalues();
  return out;
}

CompatibilityResidual compatibility(const ChartedGeometry& geo, const ACSPointData& acs) {
  const RMat om = twisted_form_matrix(geo, acs.base.x).real();
  const RMat& J = acs.J;
  const Eigen::Index m = J.rows();
  CompatibilityResidual r;
  r.square = (J * J + RMat::Identity(m, m)).cwiseAbs().maxCoeff();
  r.symplectic = (J.transpose() * om * J - om).cwiseAbs().maxCoeff();
  const RMat oj = om * J;
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (oj + oj.transpose()));
  r.metric_min = es.eigenvalues().minCoeff();
  return r;
}

double integrability_residual(const ChartedGeometry& geo, const PhasePoint& z,
                              const ComplexTime& t, double h, const FrameOptions& opts) {
  const int n = geo.dim();
  const int dim = 2 * n;
  FrameOptions raw = opts;
  raw.orthonormalize = false;

  const CMat F0 = frame_at(geo, z, t, raw).F;
  const CVec base = z.stacked();
  // dF[k] = d F / d (real coordinate k)
  std::vector<CMat> dF(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    CVec zp = base, zm = base;
    zp(k) += h;
    zm(k) -= h;
    const CMat fp = frame_at(geo, PhasePoint::from_stacked(zp), t, raw).F;
    const CMat fm = frame_at(geo, PhasePoint::from_stacked(zm), t, raw).F;
    dF[static_cast<std::size_t>(k)] = (fp - fm) / (2.0 * h);
  }
  // Directional derivative of column b along the complex vector v, extended C-linearly.
  auto deriv = [&](int b, const CVec& v) {
    CVec out = CVec::Zero(dim);
    for (int k = 0; k < dim; ++k) out += v(k) * dF[static_cast<std::size_t>(k)].col(b);
    return out;
  };
  const CMat q = linalg::orthonormalize_columns(F0);
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const CVec bracket = deriv(b, F0.col(a)) - deriv(a, F0.col(b));
      worst = std::max(worst, linalg::residual_outside(q, bracket));
    }
  }
  return worst;
}

std::vector<ACSRow> acs_batch(const ChartedGeometry& geo, const std::vector<PhasePoint>& points,
                              const ComplexTime& t, int jobs, double h, const FrameOptions& opts) {
  return parallel_map(points.size(), jobs, [&](std::size_t i) {
    ACSRow row;
    row.base = points[i];
    try {
      const LagrangianFrame f = frame_at(geo, points[i], t, opts);
      const ACSPointData acs = assemble_J(geo, f);
      row.transversality = acs.transversality;
      row.min_positivity = acs.positivity_spectrum.minCoeff();
      row.integrability = integrability_residual(geo, points[i], t, h, opts);
      row.J = acs.J;
      row.ok = true;
      row.code = "OK";
    } catch (const FlowError& e) {
      row.code = e.code();
    } catch (const IllConditionedFrame&) {
      row.code = "DEGENERATE";
    }
    return row;
  });
}

}  // namespace magtube
