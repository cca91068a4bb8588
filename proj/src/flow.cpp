#include "magtube/flow.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace magtube {

std::string failure_code(FlowFailure f) {
  switch (f) {
    case FlowFailure::Blowup:
      return "BLOWUP";
    case FlowFailure::ChartExit:
      return "CHART_EXIT";
    default:
      return "TOL";
  }
}

CVec hamiltonian_field(const ChartedGeometry& geo, const PhasePoint& z) {
  const int n = geo.dim();
  const CMat g = geo.inv_metric(z.x);
  const auto dg = geo.inv_metric_deriv(z.x);
  const CVec gp = g * z.p;
  CVec out(2 * n);
  out.head(n) = gp;
  CVec pdot = geo.beta(z.x) * gp;
  for (int l = 0; l < n; ++l) {
    pdot(l) -= 0.5 * bdot(z.p, dg[static_cast<std::size_t>(l)] * z.p);
  }
  out.tail(n) = pdot;
  return out;
}

CMat hamiltonian_jacobian(const ChartedGeometry& geo, const PhasePoint& z) {
  const int n = geo.dim();
  const CMat g = geo.inv_metric(z.x);
  const auto dg = geo.inv_metric_deriv(z.x);
  const auto d2g = geo.inv_metric_second_deriv(z.x);
  const CMat b = geo.beta(z.x);
  const auto db = geo.beta_deriv(z.x);
  const CVec gp = g * z.p;

  CMat d = CMat::Zero(2 * n, 2 * n);
  d.topRightCorner(n, n) = g;
  const CMat bg = b * g;
  for (int m = 0; m < n; ++m) {
    const CVec dgp = dg[static_cast<std::size_t>(m)] * z.p;
    // d xdot / d x^m
    d.block(0, m, n, 1) = dgp;
    // d pdot / d x^m
    CVec col = db[static_cast<std::size_t>(m)] * gp + b * dgp;
    for (int l = 0; l < n; ++l) {
      col(l) -= 0.5 * bdot(z.p, d2g[static_cast<std::size_t>(m * n + l)] * z.p);
    }
    d.block(n, m, n, 1) = col;
  }
  // d pdot_l / d p_m = -(d_l g p)_m + (beta g)_{lm}
  for (int l = 0; l < n; ++l) {
    d.block(n + l, n, 1, n) = bg.row(l) - (dg[static_cast<std::size_t>(l)] * z.p).transpose();
  }
  return d;
}

namespace {

enum class Mode { Real, Complex };

// State layout: x (n), p (n), q (1), jac column-major (4n^2, optional).
struct Layout {
  int n;
  bool jac;
  Eigen::Index size() const { return 2 * n + 1 + (jac ? 4 * n * n : 0); }
};

void check_point(const ChartedGeometry& geo, const PhasePoint& z) {
  if (z.dim() != geo.dim()) throw std::invalid_argument("phase point dimension does not match geometry");
}

FlowState integrate_path(const ChartedGeometry& geo, const PhasePoint& z0, const ComplexTime& t,
                         const FlowOptions& opts, Mode mode) {
  check_point(geo, z0);
  const int n = geo.dim();
  const Layout lay{n, opts.with_jacobian};
  CVec y = CVec::Zero(lay.size());
  y.head(n) = z0.x;
  y.segment(n, n) = z0.p;
  if (lay.jac) {
    Eigen::Map<CMat>(y.data() + 2 * n + 1, 2 * n, 2 * n) = CMat::Identity(2 * n, 2 * n);
  }

  const double vrad = geo.validity_radius();
  auto usable = [&](const CVec& s) {
    const CVec x = s.head(n);
    if (!geo.in_domain(x)) return false;
    if (s.segment(n, n).cwiseAbs().maxCoeff() >= vrad) return false;
    if (mode == Mode::Real && !geo.in_chart_box(x)) return false;
    return true;
  };

  cd origin{0.0};
  for (cd vertex : t.vertices()) {
    const cd delta = vertex - origin;
    const double len = std::abs(delta);
    if (len == 0.0) continue;

    ComplexRhs rhs = [&](double, const CVec& s, CVec& ds) {
      const CVec x = s.head(n);
      if (!geo.in_domain(x)) throw DomainError("outside geometry domain");
      const PhasePoint z(x, s.segment(n, n));
      ds.resize(s.size());
      const CVec field = hamiltonian_field(geo, z);
      ds.head(2 * n) = delta * field;
      ds(2 * n) = delta * bdot(geo.potential(x), field.head(n));
      if (lay.jac) {
        const Eigen::Map<const CMat> jac(s.data() + 2 * n + 1, 2 * n, 2 * n);
        Eigen::Map<CMat>(ds.data() + 2 * n + 1, 2 * n, 2 * n) =
            delta * (hamiltonian_jacobian(geo, z) * jac);
      }
    };

    IntegratorOptions io;
    io.rel_tol = opts.rel_tol;
    io.abs_tol = opts.abs_tol;
    io.max_steps = opts.max_steps;
    io.min_step = opts.min_step / len;
    const IntegrationResult r =
        integrate_dop853(rhs, y, 1.0, io, [&](double, const CVec& s) { return usable(s); });

    if (r.status != IntegrationStatus::Ok) {
      const cd reached = origin + r.t * delta;
      std::ostringstream os;
      os << "flow failed at time " << format_complex(reached) << ": ";
      switch (r.status) {
        case IntegrationStatus::LeftDomain:
          if (mode == Mode::Real) {
            os << "trajectory left the chart box";
            throw FlowError(FlowFailure::ChartExit, reached, os.str());
          }
          os << "left the continuation tube";
          throw FlowError(FlowFailure::Blowup, reached, os.str());
        case IntegrationStatus::StepUnderflow:
          os << "step size underflow (left the continuation tube)";
          throw FlowError(mode == Mode::Real ? FlowFailure::StepUnderflow : FlowFailure::Blowup,
                          reached, os.str());
        case IntegrationStatus::MaxSteps:
          os << "maximum number of steps exceeded";
          throw FlowError(FlowFailure::MaxSteps, reached, os.str());
        default:
          break;
      }
    }
    origin = vertex;
  }

  FlowState out;
  out.z = PhasePoint(y.head(n), y.segment(n, n));
  out.quad = y(2 * n);
  out.time = t.target();
  if (lay.jac) out.jac = Eigen::Map<const CMat>(y.data() + 2 * n + 1, 2 * n, 2 * n);
  return out;
}

void require_real_start(const ChartedGeometry& geo, const PhasePoint& z0, const char* who) {
  check_point(geo, z0);
  if (!z0.is_real()) throw std::invalid_argument(std::string(who) + ": starting point must be real");
  if (!geo.in_chart_box(z0.x)) {
    throw FlowError(FlowFailure::ChartExit, cd{0.0},
                    std::string(who) + ": starting point outside the chart box");
  }
}

}  // namespace

FlowState flow_real(const ChartedGeometry& geo, const PhasePoint& z0, double sigma,
                    const FlowOptions& opts) {
  require_real_start(geo, z0, "flow_real");
  return integrate_path(geo, z0, ComplexTime(cd{sigma}), opts, Mode::Real);
}

FlowState flow_complex(const ChartedGeometry& geo, const PhasePoint& z0, const ComplexTime& t,
                       const FlowOptions& opts) {
  require_real_start(geo, z0, "flow_complex");
  t.check_in_disk(opts.disk_radius);
  FlowState s = integrate_path(geo, z0, t, opts, Mode::Complex);
  if (opts.verify_path && std::abs(t.target()) > 0.0) {
    const ComplexTime alt = random_two_segment_path(t.target(), opts.disk_radius, opts.path_seed);
    FlowOptions o = opts;
    o.with_jacobian = false;
    const FlowState other = integrate_path(geo, z0, alt, o, Mode::Complex);
    const double dev = max_abs_diff(s.z, other.z);
    if (dev > opts.path_tol) {
      std::ostringstream os;
      os << "path dependence " << dev << " exceeds " << opts.path_tol;
      throw FlowError(FlowFailure::PathDependence, t.target(), os.str());
    }
  }
  return s;
}

FlowState flow_along(const ChartedGeometry& geo, const PhasePoint& z0, const ComplexTime& t,
                     const FlowOptions& opts) {
  return integrate_path(geo, z0, t, opts, Mode::Complex);
}

ComplexTime reversed_path(const ComplexTime& t) {
  const auto& v = t.vertices();
  if (v.empty()) return ComplexTime(cd{0.0});
  const cd end = v.back();
  std::vector<cd> via;
  for (std::size_t k = v.size() - 1; k-- > 0;) via.push_back(v[k] - end);
  return ComplexTime(-end, via);
}

ComplexTime random_two_segment_path(cd target, double disk_radius, std::uint64_t seed) {
  const double len = std::abs(target);
  if (len == 0.0) return ComplexTime(target);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> along(0.2, 0.8), side(-0.5, 0.5);
  const cd dir = target / len;
  cd corner = along(rng) * target + side(rng) * len * kI * dir;
  if (std::abs(corner) > disk_radius) corner *= disk_radius / std::abs(corner);
  return ComplexTime(target, {corner});
}

RadiusEstimate radius_estimate(double C, double A, double dist) {
  if (!(C > 0.0) || !(A > 0.0) || dist < 0.0) {
    throw std::invalid_argument("radius_estimate: need C > 0, A > 0, dist >= 0");
  }
  if (dist >= A) return {0.0, true};
  if (dist == 0.0) return {INFINITY, false};
  return {std::log(A / dist) / C, false};
}

std::vector<std::string> flow_csv_header(int n) {
  std::vector<std::string> h;
  auto add = [&](const std::string& name) {
    h.push_back("re_" + name);
    h.push_back("im_" + name);
  };
  for (int k = 0; k < n; ++k) add("x" + std::to_string(k + 1));
  for (int k = 0; k < n; ++k) add("p" + std::to_string(k + 1));
  add("q");
  for (int r = 0; r < 2 * n; ++r) {
    for (int c = 0; c < 2 * n; ++c) add("jac" + std::to_string(r) + "_" + std::to_string(c));
  }
  return h;
}

std::vector<double> flow_csv_row(const FlowState& s, int n) {
  std::vector<double> row;
  auto add = [&](cd v) {
    row.push_back(v.real());
    row.push_back(v.imag());
  };
  for (int k = 0; k < n; ++k) add(s.z.x(k));
  for (int k = 0; k < n; ++k) add(s.z.p(k));
  add(s.quad);
  for (int r = 0; r < 2 * n; ++r) {
    for (int c = 0; c < 2 * n; ++c) {
      add(s.jac.size() ? s.jac(r, c) : cd{r == c ? 1.0 : 0.0});
    }
  }
  return row;
}

}  // namespace magtube
