#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "magtube/kahler.hpp"
#include "magtube/oracles.hpp"
#include "test_support.hpp"

using namespace magtube;

TEST_CASE("potential at time zero vanishes") {
  CHECK(potential_f(*test::sphere(), PhasePoint::real({0.1, 0.2, 0.3, 0.4}), ComplexTime(cd{0.0})) == cd{0.0});
}

TEST_CASE("flat potential against the closed form") {
  const GeometryPtr g = test::flat(0.5, 2.0);
  for (const auto& z : test::random_points(31, 4, 1.0, 1.0)) {
    for (cd s : {cd{0.7}, cd{0.3, 0.8}, -kI}) {
      CHECK(std::abs(potential_f(*g, z, ComplexTime(s)) - f_flat(1.0, 2.0, z, s)) < 1e-10);
    }
  }
}

TEST_CASE("kahler differential equation and dbar identity") {
  for (const auto& g : {test::flat(1.0), test::sphere()}) {
    for (const auto& z : test::random_points(32, 3, 0.7, 1.0)) {
      CHECK(kde_residual(*g, z, 0.3) < 1e-6);
      CHECK(dbar_residual(*g, z, antiholomorphic_frame(*g, z)) < 1e-5);
    }
  }
}

TEST_CASE("kappa2 closed form and reality") {
  const double B = 1.0, m = 1.0;
  const GeometryPtr g = test::flat(B, m);
  for (const auto& z : test::random_points(33, 4, 1.0, 1.0)) {
    const auto zc = flat_complex_coords(B, m, z);
    CHECK(std::abs(kappa2(*g, z) - kappa2_flat(B, m, zc[0], zc[1])) < 1e-7);
    CHECK(std::abs(std::conj(potential_f(*g, z, ComplexTime(-kI))) - potential_f(*g, z, ComplexTime(kI))) < 1e-8);
  }
  // Zero section: kappa2 vanishes.
  CHECK(std::abs(kappa2(*test::sphere(), PhasePoint::real({0.3, 0.1, 0, 0}))) < 1e-14);
}

TEST_CASE("tanh coefficient resolution prefers B/2") {
  const Kappa1Resolution r = resolve_kappa1_coefficient(*test::flat(1.0), 1.0, 1.0, test::random_points(34, 3, 1.0, 1.0));
  CHECK(r.resolved);
  CHECK(r.chosen == TanhCoefficient::Half);
  CHECK(r.residual_half < 1e-6);
  CHECK(r.residual_full > 1e-2);
  CHECK(r.imag_half < 1e-10);
  CHECK_FALSE(r.note.empty());
  CHECK(to_string(TanhCoefficient::Full) == "B");
  CHECK(tanh_coefficient_value(TanhCoefficient::Half) == 0.5);
}

TEST_CASE("kappa closed forms in the weak field limit") {
  const cd z1{0.3, 0.4}, z2{-0.2, 0.9};
  const double m = 1.5;
  const double untwisted = m * (z1.imag() * z1.imag() + z2.imag() * z2.imag());
  CHECK(std::abs(kappa2_flat(1e-12, m, z1, z2) - untwisted) < 1e-10);
  CHECK(std::abs(kappa1_flat(1e-12, m, z1, z2) - untwisted) < 1e-10);
  CHECK(std::abs(kappa2_flat(1e-4, m, z1, z2) - kappa2_flat(2e-3, m, z1, z2)) < 1e-2);
}

TEST_CASE("holomorphic extensions") {
  const GeometryPtr g = test::flat(1.0);
  const PhasePoint z = PhasePoint::real({0.3, -0.2, 0.8, 0.1});
  const auto zc = flat_complex_coords(1.0, 1.0, z);
  CHECK(std::abs(holomorphic_extension(*g, [](const CVec& x) { return x(0) * x(1); }, z) - zc[0] * zc[1]) < 1e-10);
  const GeometryPtr s = test::sphere();
  const auto f = [](const CVec& x) { return x(0) * x(0) + x(1); };
  const CVec grad = real_gradient([&](const PhasePoint& w) { return holomorphic_extension(*s, f, w); }, z);
  CHECK(dbar_mismatch(grad, antiholomorphic_frame(*s, z), CVec()) < 1e-6);
}

TEST_CASE("richardson derivative") {
  const cd d = richardson_derivative([](double s) { return cd{std::sin(s), std::exp(s)}; }, 0.4);
  CHECK(std::abs(d - cd{std::cos(0.4), std::exp(0.4)}) < 1e-10);
}

TEST_CASE("section weights") {
  const GeometryPtr g = test::flat(1.0);
  const PhasePoint z = PhasePoint::real({0.3, -0.1, 0.4, 0.6});
  CHECK(std::abs(section_weight(*g, PhasePoint::real({0.3, 0.1, 0, 0}), 3) - 1.0) < 1e-14);
  const cd w1 = section_weight(*g, z, 1);
  CHECK(std::abs(section_weight(*g, z, 3) - w1 * w1 * w1) < 1e-12);
  const double lambda = 0.8, t = 0.4;
  const GeometryPtr h = test::flat(lambda * 2.0 * t, 1.0 / (2.0 * t));
  const auto zc = flat_complex_coords(lambda, 1.0 / (2.0 * t), z);
  CHECK(std::abs(std::log(std::norm(section_weight(*h, z, 1))) - ktx_log_weight(lambda, t, zc[0], zc[1])) < 1e-9);
}

TEST_CASE("potential batch") {
  const GeometryPtr g = test::sphere();
  std::vector<PhasePoint> pts = test::random_points(35, 2, 0.5, 0.8);
  pts.push_back(PhasePoint::real({3.5, 0, 0.1, 0}));
  const auto rows = potential_batch(*g, pts, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ok);
  CHECK(rows[0].kde_residual < 1e-6);
  CHECK(rows[0].weight_modulus > 0.0);
  CHECK_FALSE(rows[2].ok);
  CHECK(rows[2].code == "CHART_EXIT");
}
