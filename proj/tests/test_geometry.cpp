#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "magtube/geometry.hpp"
#include "test_support.hpp"

using namespace magtube;

namespace {

std::vector<RVec> samples(int count, double rad, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-rad, rad);
  std::vector<RVec> v;
  for (int k = 0; k < count; ++k) v.push_back((RVec(2) << u(rng), u(rng)).finished());
  return v;
}

}  // namespace

TEST_CASE("flat geometry passes every invariant") {
  const GeometryReport r = validate_geometry(*test::flat(1.3, 0.5), samples(50, 4.0, 1));
  for (const auto& c : r.checks) {
    INFO(c.name);
    CHECK(c.max_residual < 1e-10);
  }
  CHECK(r.all_passed());
}

TEST_CASE("sphere geometry passes every invariant up to the chart edge") {
  const GeometryReport r = validate_geometry(*test::sphere(2.0, 0.5), samples(50, 2.9, 2));
  CHECK(r.all_passed());
  CHECK(r.find("dA_equals_beta").max_residual < 1e-7);
  CHECK(r.find("metric_symmetry").max_residual < 1e-12);
}

TEST_CASE("a corrupted potential is detected") {
  const GeometryPtr s = test::sphere();
  CustomGeometrySpec spec;
  spec.dim = 2;
  spec.inv_metric = [s](const CVec& x) { return s->inv_metric(x); };
  spec.inv_metric_deriv = [s](const CVec& x) { return s->inv_metric_deriv(x); };
  spec.beta = [s](const CVec& x) { return s->beta(x); };
  spec.potential = [s](const CVec& x) { return CVec(1.01 * s->potential(x)); };
  spec.chart_radius = 3.0;
  spec.validity_radius = 100.0;
  const GeometryReport r = validate_geometry(*make_custom(spec), samples(10, 1.0, 3));
  CHECK_FALSE(r.find("dA_equals_beta").passed());
  CHECK_FALSE(r.all_passed());
}

TEST_CASE("sphere chart round trip and pullback of the area form") {
  const double r = 1.5, B = 0.4;
  const GeometryPtr g = test::sphere(r, B);
  for (const auto& u : samples(10, 2.0, 4)) {
    const CVec uc = u.cast<cd>();
    const CVec X = sphere_chart_to_embedding(r, uc);
    CHECK(std::abs(bdot(X, X) - r * r) < 1e-13);
    CHECK((sphere_embedding_to_chart(r, X) - uc).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::Matrix3cd m;
    m.col(0) = X;
    m.block(0, 1, 3, 2) = sphere_chart_jacobian(r, uc);
    CHECK(std::abs(g->beta(uc)(0, 1) - (B / r) * m.determinant()) < 1e-12);
    // Induced metric.
    const CMat D = sphere_chart_jacobian(r, uc);
    CHECK((g->inv_metric(uc) * (D.transpose() * D) - CMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sphere total flux") {
  // Integrate beta_12 over the chart plane in polar form.
  const double r = 2.0, B = 0.5;
  const GeometryPtr g = test::sphere(r, B);
  const int m = 2000;
  double acc = 0.0;
  for (int k = 0; k < m; ++k) {
    const double phi = 0.5 * M_PI * (k + 0.5) / m;
    const double rho = std::tan(phi);
    CVec u(2);
    u << rho, 0.0;
    acc += -g->beta(u)(0, 1).real() * rho / (std::cos(phi) * std::cos(phi));
  }
  const double flux = 2.0 * M_PI * acc * 0.5 * M_PI / m;
  CHECK(flux == doctest::Approx(4.0 * M_PI * r * r * B).epsilon(1e-6));
}

TEST_CASE("negated field flips beta and the potential only") {
  const GeometryPtr g = test::sphere();
  const GeometryPtr n = negate_field(g);
  CVec x(2);
  x << 0.3, -0.7;
  CHECK((n->beta(x) + g->beta(x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((n->potential(x) + g->potential(x)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((n->inv_metric(x) - g->inv_metric(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("twisted form and energy") {
  const GeometryPtr g = test::flat(2.0);
  const CMat om = twisted_form_matrix(*g, CVec::Zero(2));
  CHECK((om + om.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(om(0, 2) == cd(1.0));
  CHECK(om(2, 0) == cd(-1.0));
  CHECK(om(0, 1) == cd(-2.0));
  CHECK(energy(*g, PhasePoint::real({5, 5, 3, 4})) == cd(12.5));
}

TEST_CASE("matrix parsing and registry") {
  const RMat m = parse_matrix("0, 1; -1, 0");
  CHECK(m(0, 1) == 1.0);
  CHECK(m(1, 0) == -1.0);
  CHECK_THROWS(parse_matrix("1, 2; 3"));
  auto& reg = GeometryRegistry::instance();
  CHECK(reg.contains("flat"));
  CHECK(reg.contains("sphere"));
  GeometryConfig cfg;
  cfg.kind = "sphere";
  cfg.radius = 2.0;
  cfg.sphere_field = 0.1;
  CHECK(reg.create(cfg)->dim() == 2);
  cfg.kind = "torus";
  CHECK_THROWS(reg.create(cfg));
  CHECK_THROWS(make_flat_magnetic(2, RMat::Identity(2, 2), 1.0));
}
