#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "magtube/types.hpp"

namespace magtube {

/// Analytic data (g, beta, A) on a single chart (-rho, rho)^n.
///
/// Every evaluator is a closed-form analytic expression, so it may be called at
/// complex arguments near the real chart. Implementations are immutable and
/// safe to share between threads.
class ChartedGeometry {
 public:
  virtual ~ChartedGeometry() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  /// g^{jk}(x)
  virtual CMat inv_metric(const CVec& x) const = 0;
  /// Entry l is the matrix d g^{jk} / d x^l.
  virtual std::vector<CMat> inv_metric_deriv(const CVec& x) const = 0;
  /// beta_{jk}(x), antisymmetric.
  virtual CMat beta(const CVec& x) const = 0;
  /// A_j(x) with dA = beta on the chart.
  virtual CVec potential(const CVec& x) const = 0;

  /// Entry m*n + l is d^2 g^{jk} / dx^m dx^l. The default differentiates
  /// inv_metric_deriv by central differences with step fd_step().
  virtual std::vector<CMat> inv_metric_second_deriv(const CVec& x) const;
  /// Entry m is d beta_{jk} / d x^m; default is central differences.
  virtual std::vector<CMat> beta_deriv(const CVec& x) const;

  /// Half width rho of the real chart box.
  virtual double chart_radius() const = 0;
  /// Radius of the complex polydisk where the evaluators may be used.
  virtual double validity_radius() const = 0;
  /// True when x lies where the complex-extended evaluators are defined.
  virtual bool in_domain(const CVec& x) const;

  bool in_chart_box(const CVec& x) const;

  double fd_step() const { return fd_step_; }
  void set_fd_step(double h) { fd_step_ = h; }

 private:
  double fd_step_ = 1e-5;
};

using GeometryPtr = std::shared_ptr<const ChartedGeometry>;

/// E(x, p) = 1/2 g^{jk} p_j p_k (complex bilinear).
cd energy(const ChartedGeometry& geo, const PhasePoint& z);

/// Matrix of omega^beta = dx^j ^ dp_j - 1/2 beta_{jk} dx^j ^ dx^k, [[-beta, 1], [-1, 0]].
CMat twisted_form_matrix(const ChartedGeometry& geo, const CVec& x);

/// theta^A = (p_j + A_j) dx^j as a row covector on the 2n-dimensional tangent space.
CVec symplectic_potential(const ChartedGeometry& geo, const PhasePoint& z);

/// Constant field on R^n: g^{jk} = delta/(m eta), constant beta, A_j = 1/2 B_{kj} x^k.
GeometryPtr make_flat_magnetic(int n, const RMat& field, double mass_freq);

/// Round sphere of radius r in stereographic coordinates from the north pole,
/// with beta the pullback of (B/r)(x1 dx2^dx3 + cyclic).
GeometryPtr make_sphere_magnetic(double radius, double field, double chart_radius = 3.0);

/// Same metric, beta and A negated.
GeometryPtr negate_field(GeometryPtr geo);

/// Geometry assembled from user supplied evaluators.
struct CustomGeometrySpec {
  std::string name = "custom";
  int dim = 0;
  std::function<CMat(const CVec&)> inv_metric;
  std::function<std::vector<CMat>(const CVec&)> inv_metric_deriv;
  std::function<CMat(const CVec&)> beta;
  std::function<CVec(const CVec&)> potential;
  double chart_radius = 1.0;
  double validity_radius = 1.0;
};
GeometryPtr make_custom(CustomGeometrySpec spec);

/// Map from stereographic chart coordinates to the embedded sphere.
CVec sphere_chart_to_embedding(double radius, const CVec& u);
/// Jacobian dX/du, 3 x 2.
CMat sphere_chart_jacobian(double radius, const CVec& u);
/// Inverse stereographic projection (from the north pole).
CVec sphere_embedding_to_chart(double radius, const CVec& X);

// ---------------------------------------------------------------------------
// Validation

struct InvariantResidual {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::vector<double> worst_sample;
  bool passed() const { return max_residual <= tolerance; }
};

struct GeometryReport {
  std::vector<InvariantResidual> checks;
  bool all_passed() const;
  const InvariantResidual& find(const std::string& name) const;
};

struct ValidationOptions {
  double tol = 1e-8;
  double fd_step = 1e-5;
  /// Imaginary offset for the analyticity probe and its tolerance.
  double analytic_offset = 1e-2;
  double analytic_tol = 1e-6;
};

/// Runs the ChartedGeometry invariants at the given real samples.
GeometryReport validate_geometry(const ChartedGeometry& geo,
                                 const std::vector<RVec>& samples,
                                 const ValidationOptions& opts = {});

// ---------------------------------------------------------------------------
// Configuration

/// Parsed `key = value` geometry section.
struct GeometryConfig {
  std::string kind = "flat";
  int dim = 2;
  RMat field;
  double mass_freq = 1.0;
  double radius = 1.0;
  double sphere_field = 0.0;
};

/// Parses "a, b; c, d" into a row-major matrix.
RMat parse_matrix(const std::string& text);

using GeometryFactory = std::function<GeometryPtr(const GeometryConfig&)>;

/// Registry of geometry kinds. "flat" and "sphere" are built in; custom kinds
/// are added programmatically.
class GeometryRegistry {
 public:
  static GeometryRegistry& instance();
  void add(const std::string& kind, GeometryFactory factory);
  bool contains(const std::string& kind) const;
  GeometryPtr create(const GeometryConfig& cfg) const;

 private:
  GeometryRegistry();
  std::map<std::string, GeometryFactory> factories_;
};

}  // namespace magtube
