#include "magtube/sweep.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "magtube/flow.hpp"
#include "magtube/parallel.hpp"

namespace magtube {

std::vector<ShellRow> sweep_tube(const ChartedGeometry& geo, const SweepOptions& opts) {
  if (opts.shells <= 0 || opts.samples <= 0) throw std::invalid_argument("sweep needs positive shells and samples");
  const int n = geo.dim();
  const auto un = static_cast<std::size_t>(n);

  // Bases are drawn up front so results never depend on scheduling.
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> box(opts.xmin, opts.xmax);
  std::vector<PhasePoint> bases;
  for (int s = 1; s <= opts.shells; ++s) {
    const double pn = opts.pmax * s / opts.shells;
    for (int k = 0; k < opts.samples; ++k) {
      std::vector<double> c(2 * un);
      for (std::size_t i = 0; i < un; ++i) c[i] = box(rng);
      double norm = 0.0;
      for (std::size_t i = 0; i < un; ++i) {
        c[un + i] = normal(rng);
        norm += c[un + i] * c[un + i];
      }
      for (std::size_t i = 0; i < un; ++i) c[un + i] *= pn / std::sqrt(norm);
      bases.push_back(PhasePoint::real(c));
    }
  }

  struct Sample {
    bool ok = false;
    double transversality = 0.0, positivity = 0.0;
  };
  const auto samples = parallel_map(bases.size(), opts.jobs, [&](std::size_t k) {
    Sample out;
    try {
      const ACSPointData a = assemble_J(geo, frame_at(geo, bases[k], opts.time, opts.frame));
      out.transversality = a.transversality;
      out.positivity = a.positivity_spectrum.minCoeff();
      out.ok = out.positivity > 0.0;
    } catch (const FlowError&) {
    } catch (const IllConditionedFrame&) {
    }
    return out;
  });

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ShellRow> rows;
  for (int s = 0; s < opts.shells; ++s) {
    ShellRow r;
    r.p_norm = opts.pmax * (s + 1) / opts.shells;
    r.samples = opts.samples;
    r.min_transversality = r.min_positivity = std::numeric_limits<double>::infinity();
    for (int k = 0; k < opts.samples; ++k) {
      const Sample& sm = samples[static_cast<std::size_t>(s * opts.samples + k)];
      if (!sm.ok) continue;
      ++r.successes;
      r.min_transversality = std::min(r.min_transversality, sm.transversality);
      r.min_positivity = std::min(r.min_positivity, sm.positivity);
    }
    if (r.successes == 0) r.min_transversality = r.min_positivity = nan;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace magtube
