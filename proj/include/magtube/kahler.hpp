#pragma once

#include <functional>
#include <string>
#include <vector>

#include "magtube/flow.hpp"
#include "magtube/geometry.hpp"
#include "magtube/structure.hpp"

namespace magtube {

/// Flow options for quantities that are later differentiated numerically. The
/// tighter tolerances keep integration noise well below the difference quotients.
FlowOptions fine_flow_options();

/// f_t(z) = t E(z) - (integral of A along the flow from 0 to -t).
cd potential_f(const ChartedGeometry& geo, const PhasePoint& z, const ComplexTime& t,
               const FlowOptions& opts = fine_flow_options());

using PhaseFunction = std::function<cd(const PhasePoint&)>;

/// Real partial derivatives of f in the 2n stacked coordinates: central differences
/// at h and h/2 combined by one Richardson step.
CVec real_gradient(const PhaseFunction& f, const PhasePoint& z, double h = 1e-4);

/// Same scheme for a function of one real variable.
cd richardson_derivative(const std::function<cd(double)>& f, double s, double h = 1e-4);

/// |df/dsigma + X_E f - (theta^A(X_E) - E)| at (z, sigma).
double kde_residual(const ChartedGeometry& geo, const PhasePoint& z, double sigma,
                    double h = 1e-4, const FlowOptions& opts = fine_flow_options());

/// Orthonormal frame of the (0,1) space at z, i.e. P_z(-i).
CMat antiholomorphic_frame(const ChartedGeometry& geo, const PhasePoint& z,
                           const FrameOptions& opts = {});

/// max over columns Zb of |Zb . grad - factor * covector(Zb)|, extending the real
/// gradient C-linearly. covector may be empty (treated as zero).
double dbar_mismatch(const CVec& grad, const CMat& frame01, const CVec& covector, cd factor = 1.0);

/// dbar f_{-i} against (theta^A)^{(0,1)} on the given (0,1) frame.
double dbar_residual(const ChartedGeometry& geo, const PhasePoint& z, const CMat& frame01,
                     double h = 1e-4, const FlowOptions& opts = fine_flow_options());

/// kappa_2 = Re(2i f_{-i}) = i (f_{-i} - f_i).
double kappa2(const ChartedGeometry& geo, const PhasePoint& z,
              const FlowOptions& opts = fine_flow_options());

// ---------------------------------------------------------------------------
// Closed forms on R^2, with z1 = x + iy, z2 = u + iv

/// Two readings of the tanh coefficient in kappa_1: B/2 or B.
enum class TanhCoefficient { Half, Full };
std::string to_string(TanhCoefficient c);
double tanh_coefficient_value(TanhCoefficient c);

/// -B(uy - vx) + B coth(Bt)(v^2 + y^2) + c B tanh(Bt/2)(x^2 - y^2 + u^2 - v^2).
double kappa1_flat(double B, double mass_freq, cd z1, cd z2,
                   TanhCoefficient c = TanhCoefficient::Half);
/// -B(uy - vx) + B coth(Bt)(v^2 + y^2).
double kappa2_flat(double B, double mass_freq, cd z1, cd z2);
/// Holomorphic g = c B tanh(Bt/2)(z1^2 + z2^2).
cd g_flat(double B, double mass_freq, cd z1, cd z2, TanhCoefficient c = TanhCoefficient::Half);
/// Closed form of f_sigma on R^2 for complex sigma.
cd f_flat(double B, double mass_freq, const PhasePoint& z, cd sigma);

struct Kappa1Resolution {
  TanhCoefficient chosen = TanhCoefficient::Half;
  bool resolved = false;
  double residual_half = 0.0;
  double residual_full = 0.0;
  /// max |Im(2i f_{-i} + g)| for each reading.
  double imag_half = 0.0;
  double imag_full = 0.0;
  std::string note;
};

/// Picks the coefficient for which Im dbar kappa_1 = theta^A holds (tested as
/// Zb kappa_1 = 2i theta^A(Zb) on (0,1) frames) on the given flat samples, with
/// kappa_1 = 2i f_{-i} + g built from the numerical flow.
Kappa1Resolution resolve_kappa1_coefficient(const ChartedGeometry& flat, double B, double mass_freq,
                                            const std::vector<PhasePoint>& samples,
                                            double tol = 1e-6, double h = 1e-4);

/// f(pi(Phi_t(z))) for f analytic on the chart.
cd holomorphic_extension(const ChartedGeometry& geo, const std::function<cd(const CVec&)>& f,
                         const PhasePoint& z, const ComplexTime& t = ComplexTime(kI),
                         const FlowOptions& opts = fine_flow_options());

/// exp(-i k f_{-i}(z)).
cd section_weight(const ChartedGeometry& geo, const PhasePoint& z, int k,
                  const FlowOptions& opts = fine_flow_options());

/// lambda(uy - vx) - lambda coth(2 lambda t)(v^2 + y^2), the log of the weight
/// in the Heisenberg group heat kernel space.
double ktx_log_weight(double lambda, double t, cd z1, cd z2);

struct PotentialSample {
  PhasePoint base;
  bool ok = false;
  std::string code;
  cd f_minus_i{0.0};
  cd f_plus_i{0.0};
  double kappa2 = 0.0;
  double kde_residual = 0.0;
  double dbar_residual = 0.0;
  double weight_modulus = 0.0;
};

PotentialSample potential_sample(const ChartedGeometry& geo, const PhasePoint& z,
                                 double kde_sigma = 0.3, double h = 1e-4);

std::vector<PotentialSample> potential_batch(const ChartedGeometry& geo,
                                             const std::vector<PhasePoint>& points, int jobs = 1,
                                             double kde_sigma = 0.3, double h = 1e-4);

}  // namespace magtube
