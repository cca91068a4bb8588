#include "magtube/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace magtube {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number for '" + key + "': '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (trim(v.substr(used)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer for '" + key + "': '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<PhasePoint> GridSpec::points() const {
  const std::size_t d = count.size();
  if (d == 0 || d % 2 != 0 || min.size() != d || max.size() != d) {
    throw ConfigError("grid needs matching min/max/count for all 2n coordinates");
  }
  std::size_t total = 1;
  for (int c : count) {
    if (c <= 0) throw ConfigError("grid counts must be positive");
    total *= static_cast<std::size_t>(c);
  }
  std::vector<PhasePoint> pts;
  pts.reserve(total);
  std::vector<int> idx(d, 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> coords(d);
    for (std::size_t j = 0; j < d; ++j) {
      coords[j] = count[j] == 1 ? 0.5 * (min[j] + max[j])
                                : min[j] + (max[j] - min[j]) * idx[j] / (count[j] - 1);
    }
    pts.push_back(PhasePoint::real(coords));
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < count[j]) break;
      idx[j] = 0;
    }
  }
  return pts;
}

ComplexTime RunConfig::time_path() const {
  try {
    ComplexTime t = ComplexTime::parse(time);
    t.check_in_disk(disk_radius);
    return t;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("time: ") + e.what());
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "kind",      "dim",        "B",          "mass_freq",    "radius",        "field",
      "grid_min",  "grid_max",   "grid_count", "time",         "suite",         "seed",
      "jobs",      "tol",        "out",        "disk_radius",  "fd_step",       "kde_sigma",
      "sweep_pmax", "sweep_shells", "sweep_samples"};
  return keys;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& g = cfg.geometry;
  if (key == "kind") {
    g.kind = value;
  } else if (key == "dim") {
    g.dim = static_cast<int>(to_integer(key, value));
    if (g.dim <= 0) throw ConfigError("dim must be positive");
  } else if (key == "B") {
    try {
      g.field = parse_matrix(value);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("B: ") + e.what());
    }
  } else if (key == "mass_freq") {
    g.mass_freq = to_double(key, value);
  } else if (key == "radius") {
    g.radius = to_double(key, value);
  } else if (key == "field") {
    g.sphere_field = to_double(key, value);
  } else if (key == "grid_min") {
    cfg.grid.min = to_doubles(key, value);
  } else if (key == "grid_max") {
    cfg.grid.max = to_doubles(key, value);
  } else if (key == "grid_count") {
    cfg.grid.count.clear();
    for (const auto& s : split_list(value)) cfg.grid.count.push_back(static_cast<int>(to_integer(key, s)));
  } else if (key == "time") {
    cfg.time = value;
  } else if (key == "suite") {
    cfg.suite = value;
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(to_integer(key, value));
    if (cfg.jobs <= 0) throw ConfigError("jobs must be positive");
  } else if (key == "tol") {
    cfg.tol = to_double(key, value);
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "disk_radius") {
    cfg.disk_radius = to_double(key, value);
  } else if (key == "fd_step") {
    cfg.fd_step = to_double(key, value);
  } else if (key == "kde_sigma") {
    cfg.kde_sigma = to_double(key, value);
  } else if (key == "sweep_pmax") {
    cfg.sweep_pmax = to_double(key, value);
  } else if (key == "sweep_shells") {
    cfg.sweep_shells = static_cast<int>(to_integer(key, value));
  } else if (key == "sweep_samples") {
    cfg.sweep_samples = static_cast<int>(to_integer(key, value));
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_key_values(ss.str())) apply_config_value(cfg, k, v);
  }
  for (const auto& key : config_keys()) {
    std::string env = "MAGTUBE_" + key;
    std::transform(env.begin(), env.end(), env.begin(), [](unsigned char c) { return std::toupper(c); });
    if (const char* v = std::getenv(env.c_str())) apply_config_value(cfg, key, v);
  }
  return cfg;
}

void finalize_config(RunConfig& cfg) {
  auto& g = cfg.geometry;
  if (g.kind == "sphere") g.dim = 2;
  if (g.kind == "flat") {
    if (g.field.size() == 1 && g.dim == 2) {
      const double b = g.field(0, 0);
      g.field = (RMat(2, 2) << 0.0, b, -b, 0.0).finished();
    }
    if (g.field.size() == 0) g.field = RMat::Zero(g.dim, g.dim);
  }
  const std::size_t d = static_cast<std::size_t>(2 * g.dim);
  auto widen = [&](auto& v, auto fill) {
    using T = typename std::decay_t<decltype(v)>::value_type;
    if (v.empty()) v.assign(d, static_cast<T>(fill));
    else if (v.size() == 1) v.assign(d, v.front());
    if (v.size() != d) throw ConfigError("grid lists must have 1 or 2n entries");
  };
  widen(cfg.grid.min, -0.5);
  widen(cfg.grid.max, 0.5);
  widen(cfg.grid.count, 3);
  if (!(cfg.disk_radius > 0.0)) throw ConfigError("disk_radius must be positive");
  if (!GeometryRegistry::instance().contains(g.kind)) {
    throw ConfigError("unknown geometry kind '" + g.kind + "'");
  }
}

}  // namespace magtube
