#pragma once

#include <cstdint>
#include <vector>

#include "magtube/geometry.hpp"
#include "magtube/structure.hpp"

namespace magtube {

struct SweepOptions {
  double pmax = 3.0;
  int shells = 6;
  int samples = 8;
  /// Base points are drawn uniformly in [xmin, xmax] per chart coordinate.
  double xmin = -0.5, xmax = 0.5;
  std::uint64_t seed = 20240601;
  int jobs = 1;
  ComplexTime time = ComplexTime(kI);
  FrameOptions frame;
};

struct ShellRow {
  double p_norm = 0.0;
  int samples = 0;
  int successes = 0;
  /// Minima over successful samples; NaN when a shell has no successes.
  double min_transversality = 0.0;
  double min_positivity = 0.0;
  double success_rate() const { return samples ? static_cast<double>(successes) / samples : 0.0; }
};

/// Empirical tube picture: for |p| shells up to pmax, the fraction of random
/// directions where the structure exists (flow ok, transversal, positive).
std::vector<ShellRow> sweep_tube(const ChartedGeometry& geo, const SweepOptions& opts);

}  // namespace magtube
