#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glauberlab/harness/config.hpp"

namespace glauberlab::harness {

struct CheckRecord {
  std::string check;
  std::string instance;
  nlohmann::json values;
  bool pass = true;
  double tolerance = 0.0;
};

struct SuiteReport {
  std::string suite;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  /// Plot-ready table; empty when the suite has none.
  std::string csv;

  bool pass() const;
  nlohmann::json to_json() const;
};

struct SuiteInfo {
  std::string name;
  std::string summary;
  int default_count = 1;
  double default_tolerance = 1e-9;
  /// Which instance kinds the suite accepts; the first is the default.
  std::vector<InstanceSpec::Kind> instance_kinds;
  InstanceSpec default_instance;
  std::vector<std::string> option_keys;
  /// Observational suites record values but never fail on them.
  bool report_only = false;
};

const std::vector<SuiteInfo>& suites();
/// Throws ParseError for an unknown suite.
const SuiteInfo& suite_info(const std::string& name);

/// Runs every check of the configured suite.
SuiteReport run_suite(const ExperimentConfig& config);

/// Writes <out>/<suite>.json and, when present, <out>/<suite>.csv.
void write_report(const SuiteReport& report, const std::string& out_dir);

/// One line per failed check, then a summary line.
void print_summary(const SuiteReport& report, std::ostream& out);

}  // namespace glauberlab::harness
