#include "magtube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace magtube {

// ---------------------------------------------------------------------------
// ChartedGeometry defaults

std::vector<CMat> ChartedGeometry::inv_metric_second_deriv(const CVec& x) const {
  const int n = dim();
  const double h = fd_step_;
  std::vector<CMat> out(static_cast<std::size_t>(n * n));
  for (int m = 0; m < n; ++m) {
    CVec xp = x, xm = x;
    xp(m) += h;
    xm(m) -= h;
    const auto dp = inv_metric_deriv(xp);
    const auto dm = inv_metric_deriv(xm);
    for (int l = 0; l < n; ++l) {
      out[static_cast<std::size_t>(m * n + l)] = (dp[l] - dm[l]) / (2.0 * h);
    }
  }
  return out;
}

std::vector<CMat> ChartedGeometry::beta_deriv(const CVec& x) const {
  const int n = dim();
  const double h = fd_step_;
  std::vector<CMat> out(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    CVec xp = x, xm = x;
    xp(m) += h;
    xm(m) -= h;
    out[m] = (beta(xp) - beta(xm)) / (2.0 * h);
  }
  return out;
}

bool ChartedGeometry::in_domain(const CVec& x) const {
  return x.cwiseAbs().maxCoeff() < validity_radius();
}

bool ChartedGeometry::in_chart_box(const CVec& x) const {
  const double rho = chart_radius();
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (std::abs(x(k).real()) >= rho) return false;
  }
  return true;
}

cd energy(const ChartedGeometry& geo, const PhasePoint& z) {
  return 0.5 * z.p.transpose() * geo.inv_metric(z.x) * z.p;
}

CMat twisted_form_matrix(const ChartedGeometry& geo, const CVec& x) {
  const int n = geo.dim();
  CMat om = CMat::Zero(2 * n, 2 * n);
  om.topLeftCorner(n, n) = -geo.beta(x);
  om.topRightCorner(n, n) = CMat::Identity(n, n);
  om.bottomLeftCorner(n, n) = -CMat::Identity(n, n);
  return om;
}

CVec symplectic_potential(const ChartedGeometry& geo, const PhasePoint& z) {
  const int n = geo.dim();
  CVec theta = CVec::Zero(2 * n);
  theta.head(n) = z.p + geo.potential(z.x);
  return theta;
}

// ---------------------------------------------------------------------------
// Built-in geometries

namespace {

cd bil2(const CVec& u) { return bdot(u, u); }

class FlatMagnetic final : public ChartedGeometry {
 public:
  FlatMagnetic(int n, const RMat& field, double mass_freq)
      : n_(n), field_(field.cast<cd>()), inv_mass_(1.0 / mass_freq) {}

  int dim() const override { return n_; }
  std::string name() const override { return "flat"; }

  CMat inv_metric(const CVec&) const override {
    return inv_mass_ * CMat::Identity(n_, n_);
  }
  std::vector<CMat> inv_metric_deriv(const CVec&) const override {
    return std::vector<CMat>(static_cast<std::size_t>(n_), CMat::Zero(n_, n_));
  }
  std::vector<CMat> inv_metric_second_deriv(const CVec&) const override {
    return std::vector<CMat>(static_cast<std::size_t>(n_ * n_), CMat::Zero(n_, n_));
  }
  CMat beta(const CVec&) const override { return field_; }
  std::vector<CMat> beta_deriv(const CVec&) const override {
    return std::vector<CMat>(static_cast<std::size_t>(n_), CMat::Zero(n_, n_));
  }
  CVec potential(const CVec& x) const override {
    // A_j = 1/2 B_{kj} x^k
    return 0.5 * field_.transpose() * x;
  }
  double chart_radius() const override { return 1e6; }
  double validity_radius() const override { return 1e8; }

 private:
  int n_;
  CMat field_;
  double inv_mass_;
};

class SphereMagnetic final : public ChartedGeometry {
 public:
  SphereMagnetic(double radius, double field, double chart_radius)
      : r_(radius), b_(field), rho_(chart_radius) {}

  int dim() const override { return 2; }
  std::string name() const override { return "sphere"; }

  CMat inv_metric(const CVec& u) const override {
    const cd w = 1.0 + bil2(u);
    return (w * w / (4.0 * r_ * r_)) * CMat::Identity(2, 2);
  }
  std::vector<CMat> inv_metric_deriv(const CVec& u) const override {
    const cd w = 1.0 + bil2(u);
    std::vector<CMat> d(2);
    for (int l = 0; l < 2; ++l) d[l] = (w * u(l) / (r_ * r_)) * CMat::Identity(2, 2);
    return d;
  }
  std::vector<CMat> inv_metric_second_deriv(const CVec& u) const override {
    const cd w = 1.0 + bil2(u);
    std::vector<CMat> d(4);
    for (int m = 0; m < 2; ++m) {
      for (int l = 0; l < 2; ++l) {
        const cd c = 2.0 * u(m) * u(l) + (m == l ? w : cd{0.0});
        d[m * 2 + l] = (c / (r_ * r_)) * CMat::Identity(2, 2);
      }
    }
    return d;
  }
  CMat beta(const CVec& u) const override {
    const cd w = 1.0 + bil2(u);
    const cd b12 = -4.0 * r_ * r_ * b_ / (w * w);
    CMat m(2, 2);
    m << 0.0, b12, -b12, 0.0;
    return m;
  }
  std::vector<CMat> beta_deriv(const CVec& u) const override {
    const cd w = 1.0 + bil2(u);
    std::vector<CMat> d(2);
    for (int k = 0; k < 2; ++k) {
      const cd db = 16.0 * r_ * r_ * b_ * u(k) / (w * w * w);
      d[k].resize(2, 2);
      d[k] << 0.0, db, -db, 0.0;
    }
    return d;
  }
  CVec potential(const CVec& u) const override {
    // A = -2 r^2 B / (1 + |u|^2) (u1 du2 - u2 du1), regular away from the north pole.
    const cd h = -2.0 * r_ * r_ * b_ / (1.0 + bil2(u));
    CVec a(2);
    a << -h * u(1), h * u(0);
    return a;
  }
  double chart_radius() const override { return rho_; }
  double validity_radius() const override { return 1e3; }
  bool in_domain(const CVec& u) const override {
    return u.cwiseAbs().maxCoeff() < validity_radius() &&
           std::abs(1.0 + bil2(u)) > 1e-6;
  }

 private:
  double r_;
  double b_;
  double rho_;
};

class NegatedField final : public ChartedGeometry {
 public:
  explicit NegatedField(GeometryPtr base) : base_(std::move(base)) {}

  int dim() const override { return base_->dim(); }
  std::string name() const override { return base_->name() + "-negated"; }
  CMat inv_metric(const CVec& x) const override { return base_->inv_metric(x); }
  std::vector<CMat> inv_metric_deriv(const CVec& x) const override {
    return base_->inv_metric_deriv(x);
  }
  std::vector<CMat> inv_metric_second_deriv(const CVec& x) const override {
    return base_->inv_metric_second_deriv(x);
  }
  CMat beta(const CVec& x) const override { return -base_->beta(x); }
  std::vector<CMat> beta_deriv(const CVec& x) const override {
    auto d = base_->beta_deriv(x);
    for (auto& m : d) m = -m;
    return d;
  }
  CVec potential(const CVec& x) const override { return -base_->potential(x); }
  double chart_radius() const override { return base_->chart_radius(); }
  double validity_radius() const override { return base_->validity_radius(); }
  bool in_domain(const CVec& x) const override { return base_->in_domain(x); }

 private:
  GeometryPtr base_;
};

class CustomGeometry final : public ChartedGeometry {
 public:
  explicit CustomGeometry(CustomGeometrySpec spec) : spec_(std::move(spec)) {}

  int dim() const override { return spec_.dim; }
  std::string name() const override { return spec_.name; }
  CMat inv_metric(const CVec& x) const override { return spec_.inv_metric(x); }
  std::vector<CMat> inv_metric_deriv(const CVec& x) const override {
    return spec_.inv_metric_deriv(x);
  }
  CMat beta(const CVec& x) const override { return spec_.beta(x); }
  CVec potential(const CVec& x) const override { return spec_.potential(x); }
  double chart_radius() const override { return spec_.chart_radius; }
  double validity_radius() const override { return spec_.validity_radius; }

 private:
  CustomGeometrySpec spec_;
};

}  // namespace

GeometryPtr make_flat_magnetic(int n, const RMat& field, double mass_freq) {
  if (n <= 0) throw std::invalid_argument("make_flat_magnetic: dimension must be positive");
  if (field.rows() != n || field.cols() != n) {
    throw std::invalid_argument("make_flat_magnetic: field matrix must be n x n");
  }
  if ((field + field.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
    throw std::invalid_argument("make_flat_magnetic: field matrix must be antisymmetric");
  }
  if (!(mass_freq > 0.0)) throw std::invalid_argument("make_flat_magnetic: mass_freq must be positive");
  return std::make_shared<FlatMagnetic>(n, field, mass_freq);
}

GeometryPtr make_sphere_magnetic(double radius, double field, double chart_radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("make_sphere_magnetic: radius must be positive");
  if (!(chart_radius > 0.0)) throw std::invalid_argument("make_sphere_magnetic: chart radius must be positive");
  return std::make_shared<SphereMagnetic>(radius, field, chart_radius);
}

GeometryPtr negate_field(GeometryPtr geo) { return std::make_shared<NegatedField>(std::move(geo)); }

GeometryPtr make_custom(CustomGeometrySpec spec) {
  if (spec.dim <= 0 || !spec.inv_metric || !spec.inv_metric_deriv || !spec.beta || !spec.potential) {
    throw std::invalid_argument("make_custom: incomplete geometry specification");
  }
  return std::make_shared<CustomGeometry>(std::move(spec));
}

CVec sphere_chart_to_embedding(double radius, const CVec& u) {
  const cd s = bil2(u);
  CVec X(3);
  X << 2.0 * u(0), 2.0 * u(1), s - 1.0;
  return (radius / (1.0 + s)) * X;
}

CMat sphere_chart_jacobian(double radius, const CVec& u) {
  const cd s = bil2(u);
  const cd w = 1.0 + s;
  const cd c = radius / (w * w);
  CMat d(3, 2);
  d(0, 0) = 2.0 * c * (w - 2.0 * u(0) * u(0));
  d(0, 1) = -4.0 * c * u(0) * u(1);
  d(1, 0) = -4.0 * c * u(0) * u(1);
  d(1, 1) = 2.0 * c * (w - 2.0 * u(1) * u(1));
  d(2, 0) = 4.0 * c * u(0);
  d(2, 1) = 4.0 * c * u(1);
  return d;
}

CVec sphere_embedding_to_chart(double radius, const CVec& X) {
  CVec u(2);
  const cd denom = radius - X(2);
  u << X(0) / denom, X(1) / denom;
  return u;
}

// ---------------------------------------------------------------------------
// Validation

bool GeometryReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed(); });
}

const InvariantResidual& GeometryReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no geometry check named " + name);
}

namespace {

struct Tracker {
  InvariantResidual res;
  void record(double value, const RVec& x) {
    if (!(value <= res.max_residual) || res.worst_sample.empty()) {
      if (std::isnan(value) || value > res.max_residual || res.worst_sample.empty()) {
        res.max_residual = std::isnan(value) ? INFINITY : std::max(value, res.max_residual);
        res.worst_sample.assign(x.data(), x.data() + x.size());
      }
    }
  }
};

double max_imag(const CMat& m) { return m.size() ? m.imag().cwiseAbs().maxCoeff() : 0.0; }

// Lagrange weights of the nodes -2..2 evaluated at the point i.
std::array<cd, 5> analytic_probe_weights() {
  std::array<cd, 5> w{};
  for (int j = -2; j <= 2; ++j) {
    cd num = 1.0, den = 1.0;
    for (int m = -2; m <= 2; ++m) {
      if (m == j) continue;
      num *= kI - static_cast<double>(m);
      den *= static_cast<double>(j - m);
    }
    w[static_cast<std::size_t>(j + 2)] = num / den;
  }
  return w;
}

// Agreement of f(x + i eta e_k) with the degree-4 interpolant of f on the real
// line through x, relative to the size of f.
template <class F>
double analytic_residual(const F& f, const CVec& x, double eta) {
  static const auto w = analytic_probe_weights();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    CVec xi = x;
    xi(k) += kI * eta;
    const CMat target = f(xi);
    CMat interp = CMat::Zero(target.rows(), target.cols());
    for (int j = -2; j <= 2; ++j) {
      CVec xj = x;
      xj(k) += static_cast<double>(j) * eta;
      interp += w[static_cast<std::size_t>(j + 2)] * f(xj);
    }
    const double scale = 1.0 + target.cwiseAbs().maxCoeff();
    worst = std::max(worst, (target - interp).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

}  // namespace

GeometryReport validate_geometry(const ChartedGeometry& geo, const std::vector<RVec>& samples,
                                 const ValidationOptions& opts) {
  const int n = geo.dim();
  const double h = opts.fd_step;
  auto make = [](const char* name, double tol) {
    Tracker t;
    t.res.name = name;
    t.res.tolerance = tol;
    return t;
  };
  Tracker sym = make("metric_symmetry", opts.tol);
  Tracker pos = make("metric_positive", 0.0);
  Tracker anti = make("beta_antisymmetry", opts.tol);
  Tracker dab = make("dA_equals_beta", opts.tol);
  Tracker dg = make("metric_derivative", opts.tol);
  Tracker real = make("real_on_real", opts.tol);
  Tracker chart = make("in_chart_box", 0.0);
  Tracker analytic = make("analyticity", opts.analytic_tol);

  for (const RVec& xr : samples) {
    if (xr.size() != n) throw std::invalid_argument("validate_geometry: sample dimension mismatch");
    const CVec x = xr.cast<cd>();
    chart.record(geo.in_chart_box(x) ? 0.0 : 1.0, xr);

    const CMat g = geo.inv_metric(x);
    const CMat b = geo.beta(x);
    const CVec a = geo.potential(x);
    const auto d = geo.inv_metric_deriv(x);

    sym.record((g - g.transpose()).cwiseAbs().maxCoeff(), xr);
    Eigen::SelfAdjointEigenSolver<RMat> es(g.real());
    const double lmin = es.eigenvalues().minCoeff();
    pos.record(lmin > 0.0 ? 0.0 : 1.0 + std::abs(lmin), xr);
    anti.record((b + b.transpose()).cwiseAbs().maxCoeff(), xr);

    double im = std::max({max_imag(g), max_imag(b), max_imag(a)});
    for (const auto& m : d) im = std::max(im, max_imag(m));
    real.record(im, xr);

    // Central differences of A and g.
    CMat da(n, n);  // da(m, j) = d A_j / d x^m
    double derr = 0.0;
    for (int m = 0; m < n; ++m) {
      CVec xp = x, xm = x;
      xp(m) += h;
      xm(m) -= h;
      da.row(m) = ((geo.potential(xp) - geo.potential(xm)) / (2.0 * h)).transpose();
      const CMat fd = (geo.inv_metric(xp) - geo.inv_metric(xm)) / (2.0 * h);
      derr = std::max(derr, (fd - d[static_cast<std::size_t>(m)]).cwiseAbs().maxCoeff());
    }
    // (dA)_{jk} = d_j A_k - d_k A_j
    const CMat curl = da - da.transpose();
    dab.record((curl - b).cwiseAbs().maxCoeff(), xr);
    dg.record(derr, xr);

    const double eta = opts.analytic_offset;
    double an = analytic_residual([&](const CVec& y) { return geo.inv_metric(y); }, x, eta);
    an = std::max(an, analytic_residual([&](const CVec& y) { return geo.beta(y); }, x, eta));
    an = std::max(an, analytic_residual([&](const CVec& y) { return CMat(geo.potential(y)); }, x, eta));
    analytic.record(an, xr);
  }

  GeometryReport report;
  for (Tracker* t : {&chart, &sym, &pos, &anti, &dab, &dg, &real, &analytic}) {
    report.checks.push_back(t->res);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Configuration

RMat parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::vector<double> vals;
    std::stringstream rs(row);
    std::string cell;
    while (std::getline(rs, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      std::size_t used = 0;
      const double v = std::stod(cell.substr(first), &used);
      if (cell.find_first_not_of(" \t", first + used) != std::string::npos) {
        throw std::invalid_argument("bad matrix entry: '" + cell + "'");
      }
      vals.push_back(v);
    }
    if (!vals.empty()) rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix");
  RMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw std::invalid_argument("ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

GeometryRegistry::GeometryRegistry() {
  factories_["flat"] = [](const GeometryConfig& c) {
    RMat field = c.field.size() ? c.field : RMat::Zero(c.dim, c.dim);
    return make_flat_magnetic(c.dim, field, c.mass_freq);
  };
  factories_["sphere"] = [](const GeometryConfig& c) {
    return make_sphere_magnetic(c.radius, c.sphere_field);
  };
}

namespace {
std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

GeometryRegistry& GeometryRegistry::instance() {
  static GeometryRegistry reg;
  return reg;
}

void GeometryRegistry::add(const std::string& kind, GeometryFactory factory) {
  std::lock_guard lock(registry_mutex());
  factories_[kind] = std::move(factory);
}

bool GeometryRegistry::contains(const std::string& kind) const {
  std::lock_guard lock(registry_mutex());
  return factories_.count(kind) != 0;
}

GeometryPtr GeometryRegistry::create(const GeometryConfig& cfg) const {
  GeometryFactory f;
  {
    std::lock_guard lock(registry_mutex());
    auto it = factories_.find(cfg.kind);
    if (it == factories_.end()) throw std::invalid_argument("unknown geometry kind: " + cfg.kind);
    f = it->second;
  }
  return f(cfg);
}

}  // namespace magtube
