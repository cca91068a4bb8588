#pragma once

#include <random>
#include <vector>

#include "magtube/geometry.hpp"
#include "magtube/types.hpp"

namespace magtube::test {

inline RMat planar(double b) { return (RMat(2, 2) << 0.0, b, -b, 0.0).finished(); }

inline GeometryPtr flat(double bt = 1.0, double mass_freq = 1.0) {
  return make_flat_magnetic(2, planar(bt * mass_freq), mass_freq);
}

inline GeometryPtr sphere(double r = 1.0, double B = 0.7) { return make_sphere_magnetic(r, B); }

inline std::vector<PhasePoint> random_points(std::uint64_t seed, int count, double xr, double pr) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-xr, xr), up(-pr, pr);
  std::vector<PhasePoint> out;
  for (int k = 0; k < count; ++k) {
    const double x1 = ux(rng), x2 = ux(rng), p1 = up(rng), p2 = up(rng);
    out.push_back(PhasePoint::real({x1, x2, p1, p2}));
  }
  return out;
}

}  // namespace magtube::test
