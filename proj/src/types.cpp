#include "magtube/types.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace magtube {

PhasePoint::PhasePoint(CVec x_, CVec p_) : x(std::move(x_)), p(std::move(p_)) {
  if (x.size() != p.size()) {
    throw std::invalid_argument("PhasePoint: x and p must have the same dimension");
  }
}

CVec PhasePoint::stacked() const {
  CVec z(2 * x.size());
  z << x, p;
  return z;
}

PhasePoint PhasePoint::from_stacked(const CVec& z) {
  const Eigen::Index n = z.size() / 2;
  return PhasePoint(z.head(n), z.tail(n));
}

bool PhasePoint::is_real(double tol) const {
  return x.imag().cwiseAbs().maxCoeff() <= tol && p.imag().cwiseAbs().maxCoeff() <= tol;
}

PhasePoint PhasePoint::real(const std::vector<double>& coords) {
  if (coords.size() % 2 != 0 || coords.empty()) {
    throw std::invalid_argument("PhasePoint::real: expected 2n coordinates");
  }
  const auto n = static_cast<Eigen::Index>(coords.size() / 2);
  CVec x(n), p(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k) = coords[static_cast<std::size_t>(k)];
    p(k) = coords[static_cast<std::size_t>(k + n)];
  }
  return PhasePoint(x, p);
}

PhasePoint fiber_inversion(const PhasePoint& z) { return PhasePoint(z.x, -z.p); }

double max_abs_diff(const PhasePoint& a, const PhasePoint& b) {
  return (a.stacked() - b.stacked()).cwiseAbs().maxCoeff();
}

ComplexTime::ComplexTime(cd target) : vertices_{target} {}

ComplexTime::ComplexTime(cd target, std::vector<cd> via) : vertices_(std::move(via)) {
  vertices_.push_back(target);
}

ComplexTime ComplexTime::negated() const {
  ComplexTime out;
  out.vertices_.reserve(vertices_.size());
  for (cd v : vertices_) out.vertices_.push_back(-v);
  return out;
}

double ComplexTime::max_modulus() const {
  double m = 0.0;
  for (cd v : vertices_) m = std::max(m, std::abs(v));
  return m;
}

void ComplexTime::check_in_disk(double radius) const {
  // The disk is convex, so checking the corners covers every segment.
  if (max_modulus() > radius + 1e-15) {
    std::ostringstream os;
    os << "complex time path leaves the disk of radius " << radius;
    throw std::invalid_argument(os.str());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view s, std::string_view whole) {
  if (s == "+" || s.empty()) return 1.0;
  if (s == "-") return -1.0;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad complex literal: '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

cd parse_complex(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty complex literal");
  if (s.back() != 'i' && s.back() != 'j') return {parse_real(s, text), 0.0};

  const std::string_view body = s.substr(0, s.size() - 1);
  // Split at the last sign that does not belong to an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) return {0.0, parse_real(body, text)};
  return {parse_real(body.substr(0, split), text), parse_real(body.substr(split), text)};
}

std::string format_complex(cd value) {
  std::ostringstream os;
  os.precision(17);
  os << value.real() << (value.imag() < 0 || std::signbit(value.imag()) ? "-" : "+")
     << std::abs(value.imag()) << "i";
  return os.str();
}

ComplexTime ComplexTime::parse(std::string_view text) {
  std::vector<cd> pts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view piece =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!trim(piece).empty()) pts.push_back(parse_complex(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (pts.empty()) throw std::invalid_argument("empty complex time path");
  const cd target = pts.back();
  pts.pop_back();
  return ComplexTime(target, std::move(pts));
}

}  // namespace magtube
