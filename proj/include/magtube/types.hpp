#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace magtube {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr cd kI{0.0, 1.0};

/// Complex bilinear dot product sum_k a_k b_k (no conjugation).
inline cd bdot(const CVec& a, const CVec& b) { return (a.array() * b.array()).sum(); }

/// A point of the (complexified) cotangent bundle in chart coordinates.
struct PhasePoint {
  CVec x;
  CVec p;

  PhasePoint() = default;
  PhasePoint(CVec x_, CVec p_);

  int dim() const { return static_cast<int>(x.size()); }

  /// Stacked coordinates (x, p) as a single 2n vector.
  CVec stacked() const;
  static PhasePoint from_stacked(const CVec& z);

  /// True when every imaginary part is below `tol`.
  bool is_real(double tol = 1e-12) const;

  /// Real phase point from 2n real numbers.
  static PhasePoint real(const std::vector<double>& coords);
};

/// Fiber inversion (x, p) -> (x, -p).
PhasePoint fiber_inversion(const PhasePoint& z);

/// Largest coordinate-wise modulus of the difference.
double max_abs_diff(const PhasePoint& a, const PhasePoint& b);

/// Target in the complex time disk together with the polyline that reaches it.
///
/// `vertices` holds the corners of the polyline after the implicit start at 0;
/// the last vertex is the target.
class ComplexTime {
 public:
  ComplexTime() = default;
  explicit ComplexTime(cd target);
  ComplexTime(cd target, std::vector<cd> via);

  cd target() const { return vertices_.empty() ? cd{0.0} : vertices_.back(); }
  const std::vector<cd>& vertices() const { return vertices_; }

  /// The path s -> -s, which ends at -target.
  ComplexTime negated() const;

  /// Largest modulus reached along the path.
  double max_modulus() const;

  /// Throws std::invalid_argument when the path leaves the closed disk.
  void check_in_disk(double radius) const;

  /// Parses a comma separated list of complex literals; the last one is the target.
  static ComplexTime parse(std::string_view text);

 private:
  std::vector<cd> vertices_;
};

/// Parses complex literals such as "1", "-2.5", "i", "-i", "0.3+0.8i", "2e-1-1.5i".
cd parse_complex(std::string_view text);
std::string format_complex(cd value);

}  // namespace magtube
