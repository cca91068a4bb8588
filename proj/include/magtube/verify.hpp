#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace magtube {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  /// "<": value must stay below tolerance. ">": value must exceed it.
  std::string relation = "<";
  bool passed = false;
  /// Degenerate by construction (for example transversality at real time).
  bool expected_degenerate = false;
  std::string note;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;

  bool passed() const;
  nlohmann::ordered_json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  int jobs = 1;
  /// Integrator relative tolerance for the engine flows.
  double rel_tol = 1e-11;
};

const std::vector<std::string>& suite_names();

/// Runs one named suite ("all" runs every suite). Throws std::invalid_argument
/// for an unknown name.
std::vector<SuiteReport> run_suite(const std::string& name, const VerifyOptions& opts = {});

/// Report document for a list of suites, with an overall pass flag.
nlohmann::ordered_json reports_to_json(const std::vector<SuiteReport>& reports, const VerifyOptions& opts);

}  // namespace magtube
