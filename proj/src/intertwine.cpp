#include "magtube/intertwine.hpp"

#include "magtube/linalg.hpp"
#include "magtube/oracles.hpp"

namespace magtube {

CMat fiber_inversion_pushforward(int n) {
  CMat nu = CMat::Identity(2 * n, 2 * n);
  nu.bottomRightCorner(n, n) *= -1.0;
  return nu;
}

double check_flow_reversal(const GeometryPtr& geo_plus, const PhasePoint& z, double sigma,
                           const FlowOptions& opts) {
  const GeometryPtr geo_minus = negate_field(geo_plus);
  FlowOptions o = opts;
  o.with_jacobian = false;
  const PhasePoint lhs = fiber_inversion(flow_real(*geo_minus, fiber_inversion(z), sigma, o).z);
  const PhasePoint rhs = flow_real(*geo_plus, z, -sigma, o).z;
  return max_abs_diff(lhs, rhs);
}

double check_flow_reversal_flat(double B, double mass_freq, const PhasePoint& z, double sigma) {
  const PhasePoint lhs = fiber_inversion(flat_flow_oracle(-B, mass_freq, fiber_inversion(z), sigma));
  const PhasePoint rhs = flat_flow_oracle(B, mass_freq, z, -sigma);
  return max_abs_diff(lhs, rhs);
}

double check_frame_intertwine(const GeometryPtr& geo_plus, const PhasePoint& z, const ComplexTime& t,
                              const FrameOptions& opts) {
  const GeometryPtr geo_minus = negate_field(geo_plus);
  const CMat fp = frame_at(*geo_plus, z, t, opts).F;
  const CMat fm = frame_at(*geo_minus, fiber_inversion(z), t, opts).F;
  return linalg::subspace_distance(fm.conjugate(), fiber_inversion_pushforward(geo_plus->dim()) * fp);
}

double check_shifted_intertwine(const GeometryPtr& geo_plus, const PhasePoint& z, const ComplexTime& t,
                                const FrameOptions& opts) {
  const GeometryPtr geo_minus = negate_field(geo_plus);
  const double sigma = t.target().real();
  const CMat fp = frame_at(*geo_plus, z, t, opts).F;
  FlowOptions fo = opts.flow;
  fo.with_jacobian = true;
  fo.verify_path = false;
  const FlowState shift = flow_real(*geo_minus, fiber_inversion(z), 2.0 * sigma, fo);
  const CMat pushed = shift.jac * fiber_inversion_pushforward(geo_plus->dim()) * fp;
  const CMat fm = frame_at(*geo_minus, PhasePoint(shift.z.x.real().cast<cd>(), shift.z.p.real().cast<cd>()),
                           t, opts)
                      .F;
  return linalg::subspace_distance(fm.conjugate(), pushed);
}

IntertwineReport intertwine_report(const GeometryPtr& geo_plus, const PhasePoint& z, double sigma,
                                   const FrameOptions& opts) {
  IntertwineReport r;
  r.base = z;
  r.flow_residual = check_flow_reversal(geo_plus, z, sigma, opts.flow);
  r.subspace_distance = check_frame_intertwine(geo_plus, z, ComplexTime(kI), opts);
  return r;
}

}  // namespace magtube
