#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "magtube/flow.hpp"
#include "magtube/integrator.hpp"
#include "magtube/oracles.hpp"
#include "test_support.hpp"

using namespace magtube;

TEST_CASE("integrator reproduces exp on a complex path") {
  CVec y(1);
  y(0) = 1.0;
  IntegratorOptions o;
  o.rel_tol = 1e-12;
  o.abs_tol = 1e-14;
  const cd lambda{0.3, 2.0};
  const IntegrationResult r = integrate_dop853([&](double, const CVec& v, CVec& d) { d = lambda * v; }, y, 1.0, o);
  CHECK(r.status == IntegrationStatus::Ok);
  CHECK(std::abs(y(0) - std::exp(lambda)) < 1e-11);
}

TEST_CASE("integrator reports a guard exit") {
  CVec y(1);
  y(0) = 1.0;
  const IntegrationResult r = integrate_dop853([](double, const CVec& v, CVec& d) { d = v; }, y, 10.0, {},
                                               [](double, const CVec& v) { return std::abs(v(0)) < 100.0; });
  CHECK(r.status == IntegrationStatus::LeftDomain);
  CHECK(r.t < 10.0);
}

TEST_CASE("hamiltonian field on the plane") {
  const CVec x = hamiltonian_field(*test::flat(1.0), PhasePoint::real({0, 0, 1, 0}));
  CHECK(std::abs(x(0) - 1.0) < 1e-15);
  CHECK(std::abs(x(1)) < 1e-15);
  CHECK(std::abs(x(2)) < 1e-15);
  CHECK(std::abs(x(3) + 1.0) < 1e-15);
}

TEST_CASE("jacobian of the field matches finite differences") {
  const GeometryPtr g = test::sphere();
  const PhasePoint z = PhasePoint::real({0.4, -0.3, 0.8, 0.5});
  const CMat jac = hamiltonian_jacobian(*g, z);
  const double h = 1e-6;
  for (int k = 0; k < 4; ++k) {
    CVec a = z.stacked(), b = z.stacked();
    a(k) += h;
    b(k) -= h;
    const CVec col = (hamiltonian_field(*g, PhasePoint::from_stacked(a)) - hamiltonian_field(*g, PhasePoint::from_stacked(b))) / (2 * h);
    CHECK((col - jac.col(k)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("quarter Larmor turn") {
  const FlowState s = flow_real(*test::flat(1.0), PhasePoint::real({0, 0, 1, 0}), std::numbers::pi / 2);
  CHECK(max_abs_diff(s.z, PhasePoint::real({1, -1, 0, -1})) < 1e-10);
}

TEST_CASE("frozen flat flow at complex time") {
  // Reference from a 40 digit matrix exponential of the linear flat system
  // with B = 1, m eta = 2.
  const PhasePoint z = PhasePoint::real({0.3, -0.2, 0.7, 0.4});
  const FlowState s = flow_complex(*test::flat(0.5, 2.0), z, ComplexTime(cd{0.3, 0.8}));
  CVec want(4);
  want << cd{0.38551416764960701, 0.30885083815501448}, cd{-0.087125459372754734, 0.11948856564550246},
      cd{0.81287454062724523, 0.11948856564550246}, cd{0.314485832350393, -0.30885083815501448};
  CHECK((s.z.stacked() - want).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(max_abs_diff(flat_flow_oracle(1.0, 2.0, z, cd{0.3, 0.8}), PhasePoint::from_stacked(want)) < 1e-15);
}

TEST_CASE("energy and symplectic form are preserved") {
  const GeometryPtr g = test::sphere();
  for (const auto& z : test::random_points(5, 6, 0.8, 1.2)) {
    const FlowState s = flow_complex(*g, z, ComplexTime(cd{0.3, 0.8}));
    CHECK(std::abs(energy(*g, s.z) - energy(*g, z)) < 1e-10);
    const CMat lhs = s.jac.transpose() * twisted_form_matrix(*g, s.z.x) * s.jac;
    CHECK((lhs - twisted_form_matrix(*g, z.x)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("jacobian matches finite differences of the flow") {
  const GeometryPtr g = test::sphere();
  const PhasePoint z = PhasePoint::real({0.2, 0.1, -0.5, 0.9});
  const ComplexTime t(kI);
  const FlowState s = flow_complex(*g, z, t);
  const double h = 1e-5;
  for (int k = 0; k < 4; ++k) {
    CVec a = z.stacked(), b = z.stacked();
    a(k) += h;
    b(k) -= h;
    const CVec col = (flow_along(*g, PhasePoint::from_stacked(a), t).z.stacked() -
                      flow_along(*g, PhasePoint::from_stacked(b), t).z.stacked()) / (2 * h);
    CHECK((col - s.jac.col(k)).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("path independence and reversal") {
  const GeometryPtr g = test::sphere();
  const PhasePoint z = PhasePoint::real({0.3, -0.4, 0.6, 0.2});
  const FlowState a = flow_complex(*g, z, ComplexTime(kI));
  const FlowState b = flow_complex(*g, z, ComplexTime(kI, {cd{0.8}}));
  const FlowState c = flow_complex(*g, z, ComplexTime(kI, {cd{-0.5, 0.5}}));
  CHECK(max_abs_diff(a.z, b.z) < 1e-9);
  CHECK(max_abs_diff(a.z, c.z) < 1e-9);
  CHECK(max_abs_diff(flow_along(*g, a.z, reversed_path(ComplexTime(kI))).z, z) < 1e-9);
  FlowOptions o;
  o.verify_path = true;
  o.path_seed = 3;
  CHECK_NOTHROW(flow_complex(*g, z, ComplexTime(kI), o));
  const ComplexTime p = random_two_segment_path(kI, 1.25, 11);
  CHECK(p.vertices().size() == 2);
  CHECK(p.max_modulus() <= 1.25);
}

TEST_CASE("zero section is fixed and its tangent map is the block exponential") {
  const GeometryPtr g = test::sphere();
  const PhasePoint z = PhasePoint::real({0.5, 0.1, 0, 0});
  for (cd t : {cd{0.5}, kI, cd{0.3, 0.8}}) {
    const FlowState s = flow_complex(*g, z, ComplexTime(t));
    CHECK(max_abs_diff(s.z, z) == 0.0);
    CHECK((s.jac - zero_section_linearization(g->beta(z.x), t, g->inv_metric(z.x))).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("failure codes") {
  CHECK(failure_code(FlowFailure::Blowup) == "BLOWUP");
  CHECK(failure_code(FlowFailure::ChartExit) == "CHART_EXIT");
  CHECK(failure_code(FlowFailure::StepUnderflow) == "TOL");
  CHECK(failure_code(FlowFailure::MaxSteps) == "TOL");
  CHECK(failure_code(FlowFailure::PathDependence) == "TOL");
  const GeometryPtr g = test::sphere();
  try {
    flow_complex(*g, PhasePoint::real({3.5, 0, 0.1, 0}), ComplexTime(kI));
    FAIL("expected a chart exit");
  } catch (const FlowError& e) {
    CHECK(e.code() == "CHART_EXIT");
  }
  CHECK_THROWS_AS(flow_complex(*g, PhasePoint::real({0, 0, 1, 0}), ComplexTime(cd{0, 2})), std::invalid_argument);
  FlowOptions tiny;
  tiny.max_steps = 3;
  try {
    flow_complex(*g, PhasePoint::real({0.1, 0, 1, 0}), ComplexTime(kI), tiny);
    FAIL("expected a step limit");
  } catch (const FlowError& e) {
    CHECK(e.code() == "TOL");
  }
}

TEST_CASE("radius estimate") {
  CHECK(radius_estimate(1.0, 1.0, std::exp(-1.2)).radius == doctest::Approx(1.2));
  CHECK(radius_estimate(2.0, 1.0, 1.0).degenerate);
  CHECK(std::isinf(radius_estimate(1.0, 1.0, 0.0).radius));
}

TEST_CASE("csv row layout") {
  const FlowState s = flow_real(*test::flat(1.0), PhasePoint::real({0.1, 0.2, 0.3, 0.4}), 0.0);
  const auto h = flow_csv_header(2);
  const auto row = flow_csv_row(s, 2);
  REQUIRE(h.size() == row.size());
  CHECK(h.size() == 2 * (4 + 1 + 16));
  CHECK(h.front() == "re_x1");
  CHECK(row[0] == doctest::Approx(0.1));
  CHECK(row[10] == 1.0);  // re jac(0,0)
}
