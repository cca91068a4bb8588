#pragma once

#include <array>
#include <random>

#include "magtube/geometry.hpp"
#include "magtube/types.hpp"

namespace magtube {

using Vec3 = Eigen::Vector3cd;

// ---------------------------------------------------------------------------
// Constant field on R^2, beta = B dx1 ^ dx2, g^{jk} = delta / (m eta)

/// Closed-form flow, entire in sigma. Written with sinc-type kernels so B = 0 is regular.
PhasePoint flat_flow_oracle(double B, double mass_freq, const PhasePoint& z, cd sigma);

/// (z1, z2) = base point of the flow at time i.
std::array<cd, 2> flat_complex_coords(double B, double mass_freq, const PhasePoint& z);

// ---------------------------------------------------------------------------
// Sphere of radius r in R^3 with the rotation invariant field of strength B

struct SphereState {
  Vec3 x;
  Vec3 p;
  double r = 1.0;
  double B = 0.0;
  /// max(|x.x - r^2|, |x.p|), bilinear.
  double constraint_residual() const;
};

/// J = x cross p - r B x.
Vec3 sphere_moment_map(const Vec3& x, const Vec3& p, double r, double B);

/// exp((sigma / r^2) J x) applied to x and p. Uses entire functions of
/// sigma^2 J.J / r^4, so no branch of the square root is chosen.
SphereState sphere_flow_oracle(const SphereState& s, cd sigma);

/// a(x, p) = cosh L x + i (sinh L / L) p + ((cosh L - 1) / L^2)(B / r) J, with
/// L^2 = (p.p + r^2 B^2) / r^2. Equals the base point of the flow at time i.
Vec3 sphere_embedding_map(const SphereState& s);

/// |Im a| for a real state with |p| = pnorm: (sinh L / L) pnorm.
double sphere_im_a_modulus(double pnorm, double r, double B);

/// Chart (u, p) of the stereographic geometry to the embedded state and back.
SphereState sphere_state_from_chart(const PhasePoint& z, double r, double B);
PhasePoint sphere_chart_from_state(const SphereState& s);

/// Uniformly oriented real state with |p| drawn from [0, pmax].
SphereState random_sphere_state(std::mt19937_64& rng, double r, double B, double pmax);

// ---------------------------------------------------------------------------
// Zero section

/// [[I, sigma G phi1(sigma beta G)], [0, exp(sigma beta G)]], the tangent map of the
/// flow at a point with p = 0. G defaults to the identity.
CMat zero_section_linearization(const CMat& beta, cd sigma, const CMat& inv_metric = CMat());

/// Columns spanning the pushed vertical space, the right block column of the above.
CMat zero_section_frame(const CMat& beta, cd sigma, const CMat& inv_metric = CMat());

}  // namespace magtube
