#include "magtube/oracles.hpp"

#include <cmath>

#include "magtube/linalg.hpp"

namespace magtube {

PhasePoint flat_flow_oracle(double B, double mass_freq, const PhasePoint& z, cd sigma) {
  if (z.dim() != 2) throw std::invalid_argument("flat_flow_oracle: two dimensional phase point expected");
  const double bt = B / mass_freq;
  const cd arg = sigma * bt;
  // sin(sigma Bt) / B and (cos(sigma Bt) - 1) / B, regular at B = 0.
  const cd s_over_b = (sigma / mass_freq) * linalg::sinc(arg);
  const cd cm1_over_b = -(sigma / mass_freq) * linalg::one_minus_cos_over(arg);
  const cd c = std::cos(arg), s = std::sin(arg);
  const cd x1 = z.x(0), x2 = z.x(1), p1 = z.p(0), p2 = z.p(1);
  CVec x(2), p(2);
  x << x1 + p1 * s_over_b - p2 * cm1_over_b, x2 + p2 * s_over_b + p1 * cm1_over_b;
  p << p1 * c + p2 * s, -p1 * s + p2 * c;
  return PhasePoint(x, p);
}

std::array<cd, 2> flat_complex_coords(double B, double mass_freq, const PhasePoint& z) {
  const PhasePoint w = flat_flow_oracle(B, mass_freq, z, kI);
  return {w.x(0), w.x(1)};
}

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return Vec3(a(1) * b(2) - a(2) * b(1), a(2) * b(0) - a(0) * b(2), a(0) * b(1) - a(1) * b(0));
}

cd dot3(const Vec3& a, const Vec3& b) { return a(0) * b(0) + a(1) * b(1) + a(2) * b(2); }

}  // namespace

double SphereState::constraint_residual() const {
  return std::max(std::abs(dot3(x, x) - r * r), std::abs(dot3(x, p)));
}

Vec3 sphere_moment_map(const Vec3& x, const Vec3& p, double r, double B) {
  return cross(x, p) - (r * B) * x;
}

SphereState sphere_flow_oracle(const SphereState& s, cd sigma) {
  const Vec3 J = sphere_moment_map(s.x, s.p, s.r, s.B);
  const double r2 = s.r * s.r;
  const cd theta = sigma / r2;
  const cd w = theta * theta * dot3(J, J);
  // sin(sqrt w)/sqrt w and (1 - cos sqrt w)/w through their hyperbolic counterparts at -w.
  const cd S = linalg::sinhc_sqrt(-w);
  const cd C = linalg::coshm1_over_sq(-w);
  auto rotate = [&](const Vec3& v) {
    const Vec3 jv = cross(J, v);
    return Vec3(v + theta * S * jv + theta * theta * C * cross(J, jv));
  };
  SphereState out = s;
  out.x = rotate(s.x);
  out.p = rotate(s.p);
  return out;
}

Vec3 sphere_embedding_map(const SphereState& s) {
  const Vec3 J = sphere_moment_map(s.x, s.p, s.r, s.B);
  const double r = s.r;
  const cd L2 = (dot3(s.p, s.p) + r * r * s.B * s.B) / (r * r);
  const cd C = linalg::coshm1_over_sq(L2);  // (cosh L - 1) / L^2
  const cd coshL = 1.0 + L2 * C;
  const cd sinhc = linalg::sinhc_sqrt(L2);  // sinh L / L
  return coshL * s.x + kI * sinhc * s.p + C * (s.B / r) * J;
}

double sphere_im_a_modulus(double pnorm, double r, double B) {
  const double L2 = (pnorm * pnorm + r * r * B * B) / (r * r);
  return linalg::sinhc_sqrt(cd{L2}).real() * pnorm;
}

SphereState sphere_state_from_chart(const PhasePoint& z, double r, double B) {
  if (z.dim() != 2) throw std::invalid_argument("sphere_state_from_chart: chart point must be two dimensional");
  const cd s = bdot(z.x, z.x);
  const cd ginv = (1.0 + s) * (1.0 + s) / (4.0 * r * r);
  SphereState out;
  out.r = r;
  out.B = B;
  out.x = sphere_chart_to_embedding(r, z.x);
  out.p = sphere_chart_jacobian(r, z.x) * (ginv * z.p);
  return out;
}

PhasePoint sphere_chart_from_state(const SphereState& s) {
  const CVec u = sphere_embedding_to_chart(s.r, s.x);
  const CVec p = sphere_chart_jacobian(s.r, u).transpose() * s.p;
  return PhasePoint(u, p);
}

SphereState random_sphere_state(std::mt19937_64& rng, double r, double B, double pmax) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d x(normal(rng), normal(rng), normal(rng));
  x.normalize();
  Eigen::Vector3d v(normal(rng), normal(rng), normal(rng));
  v -= v.dot(x) * x;
  v.normalize();
  SphereState s;
  s.r = r;
  s.B = B;
  s.x = (r * x).cast<cd>();
  s.p = (pmax * unit(rng) * v).cast<cd>();
  return s;
}

CMat zero_section_linearization(const CMat& beta, cd sigma, const CMat& inv_metric) {
  const Eigen::Index n = beta.rows();
  const CMat g = inv_metric.size() ? inv_metric : CMat::Identity(n, n);
  const CMat x = sigma * beta * g;
  CMat m = CMat::Zero(2 * n, 2 * n);
  m.topLeftCorner(n, n) = CMat::Identity(n, n);
  m.topRightCorner(n, n) = sigma * g * linalg::phi1(x);
  m.bottomRightCorner(n, n) = linalg::expm(x);
  return m;
}

CMat zero_section_frame(const CMat& beta, cd sigma, const CMat& inv_metric) {
  const Eigen::Index n = beta.rows();
  return zero_section_linearization(beta, sigma, inv_metric).rightCols(n);
}

}  // namespace magtube
