#include "magtube/kahler.hpp"

#include <cmath>
#include <sstream>

#include "magtube/linalg.hpp"
#include "magtube/parallel.hpp"

namespace magtube {

FlowOptions fine_flow_options() {
  FlowOptions o;
  o.rel_tol = 1e-13;
  o.abs_tol = 1e-15;
  o.with_jacobian = false;
  return o;
}

cd potential_f(const ChartedGeometry& geo, const PhasePoint& z, const ComplexTime& t,
               const FlowOptions& opts) {
  FlowOptions o = opts;
  o.with_jacobian = false;
  const FlowState s = flow_complex(geo, z, t.negated(), o);
  return t.target() * energy(geo, z) - s.quad;
}

cd richardson_derivative(const std::function<cd(double)>& f, double s, double h) {
  const cd d1 = (f(s + h) - f(s - h)) / (2.0 * h);
  const cd d2 = (f(s + 0.5 * h) - f(s - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

CVec real_gradient(const PhaseFunction& f, const PhasePoint& z, double h) {
  const CVec base = z.stacked();
  CVec g(base.size());
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    g(k) = richardson_derivative(
        [&](double s) {
          CVec w = base;
          w(k) += s;
          return f(PhasePoint::from_stacked(w));
        },
        0.0, h);
  }
  return g;
}

double kde_residual(const ChartedGeometry& geo, const PhasePoint& z, double sigma, double h,
                    const FlowOptions& opts) {
  const int n = geo.dim();
  const cd dfds = richardson_derivative(
      [&](double s) { return potential_f(geo, z, ComplexTime(cd{s}), opts); }, sigma, h);
  const CVec grad =
      real_gradient([&](const PhasePoint& w) { return potential_f(geo, w, ComplexTime(cd{sigma}), opts); },
                    z, h);
  const CVec xe = hamiltonian_field(geo, z);
  const cd xef = bdot(xe, grad);
  const cd E = energy(geo, z);
  const cd theta_xe = bdot(symplectic_potential(geo, z), xe);  // 2E + A(pi_* X_E)
  (void)n;
  return std::abs(dfds + xef - (theta_xe - E));
}

CMat antiholomorphic_frame(const ChartedGeometry& geo, const PhasePoint& z, const FrameOptions& opts) {
  FrameOptions o = opts;
  o.orthonormalize = true;
  return frame_at(geo, z, ComplexTime(-kI), o).F;
}

double dbar_mismatch(const CVec& grad, const CMat& frame01, const CVec& covector, cd factor) {
  double worst = 0.0;
  for (Eigen::Index a = 0; a < frame01.cols(); ++a) {
    const CVec zb = frame01.col(a);
    cd r = bdot(grad, zb);
    if (covector.size()) r -= factor * bdot(covector, zb);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double dbar_residual(const ChartedGeometry& geo, const PhasePoint& z, const CMat& frame01,
                     double h, const FlowOptions& opts) {
  const CVec grad =
      real_gradient([&](const PhasePoint& w) { return potential_f(geo, w, ComplexTime(-kI), opts); },
                    z, h);
  return dbar_mismatch(grad, frame01, symplectic_potential(geo, z));
}

double kappa2(const ChartedGeometry& geo, const PhasePoint& z, const FlowOptions& opts) {
  return (2.0 * kI * potential_f(geo, z, ComplexTime(-kI), opts)).real();
}

// ---------------------------------------------------------------------------

std::string to_string(TanhCoefficient c) { return c == TanhCoefficient::Half ? "B/2" : "B"; }

double tanh_coefficient_value(TanhCoefficient c) { return c == TanhCoefficient::Half ? 0.5 : 1.0; }

namespace {

// B coth(B / m eta), continuous at B = 0 where it equals m eta.
double b_coth(double B, double mass_freq) {
  const double bt = B / mass_freq;
  if (std::abs(bt) < linalg::kSeriesSwitch) return mass_freq * (1.0 + bt * bt / 3.0);
  return B / std::tanh(bt);
}

}  // namespace

double kappa2_flat(double B, double mass_freq, cd z1, cd z2) {
  const double x = z1.real(), y = z1.imag(), u = z2.real(), v = z2.imag();
  return -B * (u * y - v * x) + b_coth(B, mass_freq) * (v * v + y * y);
}

double kappa1_flat(double B, double mass_freq, cd z1, cd z2, TanhCoefficient c) {
  const double x = z1.real(), y = z1.imag(), u = z2.real(), v = z2.imag();
  const double bt = B / mass_freq;
  return kappa2_flat(B, mass_freq, z1, z2) +
         tanh_coefficient_value(c) * B * std::tanh(0.5 * bt) * (x * x - y * y + u * u - v * v);
}

cd g_flat(double B, double mass_freq, cd z1, cd z2, TanhCoefficient c) {
  return tanh_coefficient_value(c) * B * std::tanh(0.5 * B / mass_freq) * (z1 * z1 + z2 * z2);
}

cd f_flat(double B, double mass_freq, const PhasePoint& z, cd sigma) {
  const double bt = B / mass_freq;
  const cd arg = sigma * bt;
  const cd x1 = z.x(0), x2 = z.x(1), p1 = z.p(0), p2 = z.p(1);
  const cd half_sin_over_b = 0.5 * (sigma / mass_freq) * linalg::sinc(arg);
  return -0.5 * std::sin(arg) * (x2 * p1 - x1 * p2) - 0.5 * (std::cos(arg) - 1.0) * (x1 * p1 + x2 * p2) +
         half_sin_over_b * (p1 * p1 + p2 * p2);
}

Kappa1Resolution resolve_kappa1_coefficient(const ChartedGeometry& flat, double B, double mass_freq,
                                            const std::vector<PhasePoint>& samples, double tol,
                                            double h) {
  Kappa1Resolution res;
  const FlowOptions fo = fine_flow_options();
  auto zcoords = [&](const PhasePoint& w) {
    FlowOptions o = fo;
    const FlowState s = flow_complex(flat, w, ComplexTime(kI), o);
    return std::array<cd, 2>{s.z.x(0), s.z.x(1)};
  };
  auto kappa1_numeric = [&](const PhasePoint& w, TanhCoefficient c) {
    const auto zc = zcoords(w);
    return 2.0 * kI * potential_f(flat, w, ComplexTime(-kI), fo) + g_flat(B, mass_freq, zc[0], zc[1], c);
  };
  for (const PhasePoint& z : samples) {
    const CMat frame01 = antiholomorphic_frame(flat, z);
    const CVec theta = symplectic_potential(flat, z);
    for (TanhCoefficient c : {TanhCoefficient::Half, TanhCoefficient::Full}) {
      const cd k = kappa1_numeric(z, c);
      const CVec grad =
          real_gradient([&](const PhasePoint& w) { return cd{kappa1_numeric(w, c).real()}; }, z, h);
      const double r = dbar_mismatch(grad, frame01, theta, 2.0 * kI);
      if (c == TanhCoefficient::Half) {
        res.residual_half = std::max(res.residual_half, r);
        res.imag_half = std::max(res.imag_half, std::abs(k.imag()));
      } else {
        res.residual_full = std::max(res.residual_full, r);
        res.imag_full = std::max(res.imag_full, std::abs(k.imag()));
      }
    }
  }
  const bool half_ok = res.residual_half <= tol;
  const bool full_ok = res.residual_full <= tol;
  std::ostringstream note;
  if (half_ok && !full_ok) {
    res.chosen = TanhCoefficient::Half;
    res.resolved = true;
  } else if (full_ok && !half_ok) {
    res.chosen = TanhCoefficient::Full;
    res.resolved = true;
  } else {
    res.chosen = res.residual_half <= res.residual_full ? TanhCoefficient::Half : TanhCoefficient::Full;
    res.resolved = false;
  }
  note << "tanh coefficient " << to_string(res.chosen) << (res.resolved ? " accepted" : " unresolved")
       << "; adaptedness residual B/2: " << res.residual_half << ", B: " << res.residual_full
       << "; max |Im kappa1| B/2: " << res.imag_half << ", B: " << res.imag_full;
  res.note = note.str();
  return res;
}

cd holomorphic_extension(const ChartedGeometry& geo, const std::function<cd(const CVec&)>& f,
                         const PhasePoint& z, const ComplexTime& t, const FlowOptions& opts) {
  FlowOptions o = opts;
  o.with_jacobian = false;
  const FlowState s = flow_complex(geo, z, t, o);
  return f(s.z.x);
}

cd section_weight(const ChartedGeometry& geo, const PhasePoint& z, int k, const FlowOptions& opts) {
  if (k <= 0) throw std::invalid_argument("section_weight: k must be positive");
  return std::exp(-kI * static_cast<double>(k) * potential_f(geo, z, ComplexTime(-kI), opts));
}

double ktx_log_weight(double lambda, double t, cd z1, cd z2) {
  const double x = z1.real(), y = z1.imag(), u = z2.real(), v = z2.imag();
  return lambda * (u * y - v * x) - lambda / std::tanh(2.0 * lambda * t) * (v * v + y * y);
}

PotentialSample potential_sample(const ChartedGeometry& geo, const PhasePoint& z, double kde_sigma,
                                 double h) {
  PotentialSample s;
  s.base = z;
  try {
    const FlowOptions fo = fine_flow_options();
    s.f_minus_i = potential_f(geo, z, ComplexTime(-kI), fo);
    s.f_plus_i = potential_f(geo, z, ComplexTime(kI), fo);
    s.kappa2 = (2.0 * kI * s.f_minus_i).real();
    s.kde_residual = kde_residual(geo, z, kde_sigma, h, fo);
    s.dbar_residual = dbar_residual(geo, z, antiholomorphic_frame(geo, z), h, fo);
    s.weight_modulus = std::abs(std::exp(-kI * s.f_minus_i));
    s.ok = true;
    s.code = "OK";
  } catch (const FlowError& e) {
    s.code = e.code();
  }
  return s;
}

std::vector<PotentialSample> potential_batch(const ChartedGeometry& geo,
                                             const std::vector<PhasePoint>& points, int jobs,
                                             double kde_sigma, double h) {
  return parallel_map(points.size(), jobs,
                      [&](std::size_t i) { return potential_sample(geo, points[i], kde_sigma, h); });
}

}  // namespace magtube
