#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "magtube/linalg.hpp"
#include "magtube/types.hpp"

using namespace magtube;

TEST_CASE("complex literals") {
  CHECK(parse_complex("i") == cd(0, 1));
  CHECK(parse_complex("-i") == cd(0, -1));
  CHECK(parse_complex("0.3+0.8i") == cd(0.3, 0.8));
  CHECK(parse_complex("2") == cd(2, 0));
  CHECK(parse_complex("1e-1-2i") == cd(0.1, -2));
  CHECK_THROWS_AS(parse_complex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_complex(""), std::invalid_argument);
  CHECK(parse_complex(format_complex(cd(0.125, -3.5))) == cd(0.125, -3.5));
}

TEST_CASE("complex time paths") {
  const ComplexTime t = ComplexTime::parse("0.8, 0.8+0.5i, i");
  CHECK(t.target() == cd(0, 1));
  REQUIRE(t.vertices().size() == 3);
  CHECK(t.vertices()[0] == cd(0.8, 0));
  CHECK(t.max_modulus() == doctest::Approx(1.0));
  CHECK_NOTHROW(t.check_in_disk(1.25));
  CHECK_THROWS_AS(ComplexTime::parse("2i").check_in_disk(1.25), std::invalid_argument);
  CHECK(ComplexTime::parse("0.5i").negated().target() == cd(0, -0.5));
}

TEST_CASE("phase points") {
  const PhasePoint z = PhasePoint::real({1, 2, 3, 4});
  CHECK(z.dim() == 2);
  CHECK(z.is_real());
  const PhasePoint n = fiber_inversion(z);
  CHECK(n.p(0) == cd(-3));
  CHECK(n.x(1) == cd(2));
  CHECK(max_abs_diff(PhasePoint::from_stacked(z.stacked()), z) == 0.0);
  CHECK_THROWS_AS(PhasePoint::real({1, 2, 3}), std::invalid_argument);
}

TEST_CASE("removable singularities") {
  // Both sides of the series switch agree to near machine precision.
  for (double w : {0.999e-3, 1.001e-3, -0.999e-3, -1.001e-3}) {
    const double s = std::sqrt(std::abs(w));
    const double want = w > 0 ? std::sinh(s) / s : std::sin(s) / s;
    CHECK(std::abs(linalg::sinhc_sqrt(w) - want) < 1e-15);
    const double c = w > 0 ? (std::cosh(s) - 1.0) / w : (std::cos(s) - 1.0) / w;
    CHECK(std::abs(linalg::coshm1_over_sq(w) - c) < 1e-12);
  }
  CHECK(linalg::sinc(0.0) == cd(1.0));
  CHECK(std::abs(linalg::sinc(cd(0, 1)) - std::sinh(1.0)) < 1e-15);
  CHECK(std::abs(linalg::one_minus_cos_over(cd(1e-6)) - 5e-7) < 1e-18);
}

TEST_CASE("matrix functions") {
  CMat a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  const CMat e = linalg::expm(a);
  CHECK(std::abs(e(0, 0) - std::cos(1.0)) < 1e-15);
  CHECK(std::abs(e(0, 1) - std::sin(1.0)) < 1e-15);
  // phi1(A) A = exp(A) - I.
  const CMat b = cd(0, -2) * a;
  const CMat lhs = linalg::phi1(b) * b;
  CHECK((lhs - (linalg::expm(b) - CMat::Identity(2, 2))).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((linalg::phi1(CMat::Zero(2, 2)) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("subspaces") {
  CMat f(4, 2);
  f << 1, 2, 0, 1, 3, 0, 1, 1;
  const CMat q = linalg::orthonormalize_columns(f);
  CHECK((q.adjoint() * q - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(linalg::subspace_distance(f, q) < 1e-14);
  CMat g = CMat::Zero(4, 2);
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  CMat h = CMat::Zero(4, 2);
  h(0, 0) = 1.0;
  h(2, 1) = 1.0;
  CHECK(linalg::subspace_distance(g, h) == doctest::Approx(1.0));
  CHECK(linalg::smallest_singular_value(CMat::Identity(3, 3) * 2.0) == doctest::Approx(2.0));
  CHECK(linalg::residual_outside(q, q.col(0)) < 1e-14);
}
