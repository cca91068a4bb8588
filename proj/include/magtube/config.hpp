#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "magtube/geometry.hpp"
#include "magtube/types.hpp"

namespace magtube {

/// Bad configuration file, key or value. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raw `key = value` pairs. Lines starting with '#' are comments and `[section]`
/// headers are accepted for readability but do not namespace keys.
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct GridSpec {
  /// Per stacked coordinate (x_1..x_n, p_1..p_n).
  std::vector<double> min, max;
  std::vector<int> count;
  /// Points in row-major order, last coordinate fastest.
  std::vector<PhasePoint> points() const;
};

struct RunConfig {
  GeometryConfig geometry;
  GridSpec grid;
  std::string time = "i";
  std::string suite = "all";
  std::uint64_t seed = 20240601;
  int jobs = 1;
  /// Integrator relative tolerance; the absolute tolerance is tol / 100.
  double tol = 1e-11;
  std::string out;
  double disk_radius = 1.25;
  double fd_step = 1e-4;
  double kde_sigma = 0.3;
  /// Tube sweep: |p| shells up to sweep_pmax, samples per shell.
  double sweep_pmax = 3.0;
  int sweep_shells = 6;
  int sweep_samples = 8;

  ComplexTime time_path() const;
};

/// Keys recognised in files and as MAGTUBE_<KEY> environment overrides.
const std::vector<std::string>& config_keys();

/// Applies one key, throwing ConfigError on unknown keys or bad values.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Defaults, then file (if path non-empty), then MAGTUBE_* environment variables.
RunConfig load_config(const std::string& path);

/// Defaults sized for the chosen geometry when the grid is left unspecified.
void finalize_config(RunConfig& cfg);

}  // namespace magtube
