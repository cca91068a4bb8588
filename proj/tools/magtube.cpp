#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "magtube/config.hpp"
#include "magtube/flow.hpp"
#include "magtube/kahler.hpp"
#include "magtube/parallel.hpp"
#include "magtube/structure.hpp"
#include "magtube/sweep.hpp"
#include "magtube/verify.hpp"

using namespace magtube;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string suite;
  long long seed = -1;
  int jobs = 0;
  double tol = 0.0;
};

RunConfig resolve(const Flags& f, const std::string& suite_arg = "") {
  RunConfig cfg = load_config(f.config);
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.suite.empty()) cfg.suite = f.suite;
  if (!suite_arg.empty()) cfg.suite = suite_arg;
  if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
  if (f.jobs > 0) cfg.jobs = f.jobs;
  if (f.tol > 0.0) cfg.tol = f.tol;
  finalize_config(cfg);
  return cfg;
}

FlowOptions flow_options(const RunConfig& cfg) {
  FlowOptions o;
  o.rel_tol = cfg.tol;
  o.abs_tol = cfg.tol * 1e-2;
  o.disk_radius = cfg.disk_radius;
  return o;
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void write(const std::string& path) const {
    std::ofstream file;
    if (!path.empty()) {
      file.open(path);
      if (!file) throw ConfigError("cannot write '" + path + "'");
    }
    std::ostream& os = path.empty() ? std::cout : file;
    emit(os, header_);
    for (const auto& r : rows_) emit(os, r);
  }

 private:
  static void emit(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> coord_header(int n) {
  std::vector<std::string> h;
  for (int i = 1; i <= n; ++i) h.push_back("x" + std::to_string(i));
  for (int i = 1; i <= n; ++i) h.push_back("p" + std::to_string(i));
  return h;
}

std::vector<std::string> coord_cells(const PhasePoint& z) {
  std::vector<std::string> c;
  const CVec s = z.stacked();
  for (Eigen::Index i = 0; i < s.size(); ++i) c.push_back(num(s(i).real()));
  return c;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

void pad(std::vector<std::string>& row, std::size_t width) {
  while (row.size() < width) row.push_back("nan");
}

int cmd_flow(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  const int n = geo->dim();
  const ComplexTime t = cfg.time_path();
  const FlowOptions opts = flow_options(cfg);
  const auto pts = cfg.grid.points();
  std::vector<std::string> header = coord_header(n);
  header.push_back("code");
  append(header, flow_csv_header(n));
  const auto rows = parallel_map(pts.size(), cfg.jobs, [&](std::size_t k) {
    std::vector<std::string> row = coord_cells(pts[k]);
    try {
      const bool real = t.vertices().size() == 1 && t.target().imag() == 0.0;
      const FlowState s = real ? flow_real(*geo, pts[k], t.target().real(), opts) : flow_complex(*geo, pts[k], t, opts);
      row.push_back("OK");
      for (double v : flow_csv_row(s, n)) row.push_back(num(v));
    } catch (const FlowError& e) {
      row.push_back(e.code());
    }
    return row;
  });
  Table table(header);
  for (auto row : rows) {
    pad(row, header.size());
    table.add(std::move(row));
  }
  table.write(cfg.out);
  return 0;
}

int cmd_frame(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  const int n = geo->dim();
  const ComplexTime t = cfg.time_path();
  FrameOptions opts;
  opts.flow = flow_options(cfg);
  const auto pts = cfg.grid.points();
  std::vector<std::string> header = coord_header(n);
  header.push_back("code");
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::string ij = std::to_string(i) + "_" + std::to_string(j);
      header.push_back("re_F" + ij);
      header.push_back("im_F" + ij);
    }
  }
  const auto rows = parallel_map(pts.size(), cfg.jobs, [&](std::size_t k) {
    std::vector<std::string> row = coord_cells(pts[k]);
    try {
      const LagrangianFrame f = frame_at(*geo, pts[k], t, opts);
      row.push_back("OK");
      for (int i = 0; i < 2 * n; ++i) {
        for (int j = 0; j < n; ++j) {
          row.push_back(num(f.F(i, j).real()));
          row.push_back(num(f.F(i, j).imag()));
        }
      }
    } catch (const FlowError& e) {
      row.push_back(e.code());
    }
    return row;
  });
  Table table(header);
  for (auto row : rows) {
    pad(row, header.size());
    table.add(std::move(row));
  }
  table.write(cfg.out);
  return 0;
}

int cmd_acs(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  const int n = geo->dim();
  FrameOptions opts;
  opts.flow = flow_options(cfg);
  const auto rows = acs_batch(*geo, cfg.grid.points(), cfg.time_path(), cfg.jobs, cfg.fd_step, opts);
  std::vector<std::string> header = coord_header(n);
  append(header, {"code", "transversality", "min_positivity", "integrability"});
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) header.push_back("J" + std::to_string(i) + "_" + std::to_string(j));
  }
  Table table(header);
  for (const auto& r : rows) {
    std::vector<std::string> row = coord_cells(r.base);
    row.push_back(r.code);
    if (r.J.size() > 0) {
      append(row, {num(r.transversality), num(r.min_positivity), num(r.integrability)});
      for (int i = 0; i < 2 * n; ++i) {
        for (int j = 0; j < 2 * n; ++j) row.push_back(num(r.J(i, j)));
      }
    } else if (r.code == "DEGENERATE") {
      row.push_back(num(r.transversality));
    }
    pad(row, header.size());
    table.add(std::move(row));
  }
  table.write(cfg.out);
  return 0;
}

int cmd_potential(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  const auto rows = potential_batch(*geo, cfg.grid.points(), cfg.jobs, cfg.kde_sigma, cfg.fd_step);
  std::vector<std::string> header = coord_header(geo->dim());
  append(header, {"code", "re_f_minus_i", "im_f_minus_i", "kappa2", "kde_residual", "dbar_residual", "weight_modulus"});
  Table table(header);
  for (const auto& r : rows) {
    std::vector<std::string> row = coord_cells(r.base);
    row.push_back(r.code);
    if (r.ok) {
      append(row, {num(r.f_minus_i.real()), num(r.f_minus_i.imag()), num(r.kappa2), num(r.kde_residual),
                   num(r.dbar_residual), num(r.weight_modulus)});
    }
    pad(row, header.size());
    table.add(std::move(row));
  }
  table.write(cfg.out);
  return 0;
}

int cmd_extend(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  const int n = geo->dim();
  const ComplexTime t = cfg.time_path();
  FlowOptions opts = fine_flow_options();
  opts.disk_radius = cfg.disk_radius;
  const auto pts = cfg.grid.points();
  std::vector<std::string> header = coord_header(n);
  header.push_back("code");
  for (int i = 1; i <= n; ++i) {
    header.push_back("re_x" + std::to_string(i));
    header.push_back("im_x" + std::to_string(i));
  }
  const auto rows = parallel_map(pts.size(), cfg.jobs, [&](std::size_t k) {
    std::vector<std::string> row = coord_cells(pts[k]);
    try {
      const FlowState s = flow_complex(*geo, pts[k], t, opts);
      row.push_back("OK");
      for (int i = 0; i < n; ++i) {
        row.push_back(num(s.z.x(i).real()));
        row.push_back(num(s.z.x(i).imag()));
      }
    } catch (const FlowError& e) {
      row.push_back(e.code());
    }
    return row;
  });
  Table table(header);
  for (auto row : rows) {
    pad(row, header.size());
    table.add(std::move(row));
  }
  table.write(cfg.out);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  VerifyOptions vo;
  vo.seed = cfg.seed;
  vo.jobs = cfg.jobs;
  vo.rel_tol = cfg.tol;
  std::vector<SuiteReport> reports;
  try {
    reports = run_suite(cfg.suite, vo);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto doc = reports_to_json(reports, vo);
  if (cfg.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream file(cfg.out);
    if (!file) throw ConfigError("cannot write '" + cfg.out + "'");
    file << doc.dump(2) << '\n';
  }
  for (const auto& r : reports) {
    for (const auto& c : r.checks) {
      if (!c.passed) std::cerr << "FAIL " << r.suite << "." << c.name << " = " << c.value << '\n';
    }
  }
  return doc["passed"].get<bool>() ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg) {
  const GeometryPtr geo = GeometryRegistry::instance().create(cfg.geometry);
  SweepOptions o;
  o.pmax = cfg.sweep_pmax;
  o.shells = cfg.sweep_shells;
  o.samples = cfg.sweep_samples;
  o.xmin = *std::min_element(cfg.grid.min.begin(), cfg.grid.min.begin() + geo->dim());
  o.xmax = *std::max_element(cfg.grid.max.begin(), cfg.grid.max.begin() + geo->dim());
  o.seed = cfg.seed;
  o.jobs = cfg.jobs;
  o.time = cfg.time_path();
  o.frame.flow = flow_options(cfg);
  if (o.shells <= 0 || o.samples <= 0) throw ConfigError("sweep_shells and sweep_samples must be positive");
  Table table({"p_norm", "samples", "successes", "success_rate", "min_transversality", "min_positivity"});
  for (const auto& r : sweep_tube(*geo, o)) {
    table.add({num(r.p_norm), std::to_string(r.samples), std::to_string(r.successes), num(r.success_rate()),
               num(r.min_transversality), num(r.min_positivity)});
  }
  table.write(cfg.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic adapted complex structures by imaginary-time flow"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  app.add_option("--config", flags.config, "Configuration file (key = value)");
  app.add_option("--out", flags.out, "Output path (default stdout)");
  app.add_option("--suite", flags.suite, "Verification suite");
  app.add_option("--seed", flags.seed, "Random seed");
  app.add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", flags.tol, "Integrator relative tolerance")->check(CLI::PositiveNumber);

  std::string suite_arg;
  using Command = int (*)(const RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"flow", "Flow grid points to the configured time", cmd_flow},
      {"frame", "Transported vertical frames P(t)", cmd_frame},
      {"acs", "Almost complex structure and its checks", cmd_acs},
      {"potential", "Kahler potential samples", cmd_potential},
      {"extend", "Holomorphic extension of the chart coordinates", cmd_extend},
      {"verify", "Run a verification suite (JSON report)", cmd_verify},
      {"sweep", "Per-|p| tube success rates", cmd_sweep}};
  Command chosen = nullptr;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (name == "verify") sub->add_option("suite", suite_arg, "Suite name or 'all'");
    sub->callback([&chosen, fn = fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return chosen(resolve(flags, suite_arg));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
