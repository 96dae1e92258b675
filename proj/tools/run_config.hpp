#pragma once

// JSON run configuration for the command-line tool. Every key is checked
// against the schema before anything is computed; unknown keys are errors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "consolidate/consolidate.h"

namespace cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicySection {
  csl_policy_kind kind = CSL_POLICY_QP;
  std::optional<int> q;
  std::optional<long> n;
  std::optional<double> T;
};

struct SimulationSection {
  std::optional<long> cycles;
  std::optional<std::uint64_t> seed;
  std::optional<long> batch_size;
  std::optional<unsigned> threads;
};

struct CompareSection {
  std::optional<double> target_elc;
  std::optional<double> target_elr;
  std::vector<int> qh_list;
};

struct VerifySection {
  std::optional<std::vector<double>> lambdas;
  std::optional<std::vector<int>> q_values;
  std::optional<std::vector<int>> qh_offsets;
  std::optional<std::vector<long>> elr_ratios;
  std::optional<csl_costs> costs;
};

struct OptimizeSection {
  std::optional<csl_policy_kind> kind;
  std::optional<int> q_max;
  std::optional<long> Q_max;
  std::optional<double> T_max;
};

struct OutputSection {
  std::optional<std::string> path;
  std::optional<std::string> format;
  std::optional<std::string> trace;
};

struct RunConfig {
  std::string source;  // file name used in diagnostics
  std::optional<double> lambda;
  std::optional<PolicySection> policy;
  std::optional<long> Q;
  std::optional<csl_costs> costs;
  std::optional<csl_mode> mode;
  std::optional<csl_delay> delay;
  SimulationSection simulation;
  CompareSection compare;
  VerifySection verify;
  OptimizeSection optimize;
  OutputSection output;
};

/// Parses and schema-checks a config document. Diagnostics name the file,
/// line and field.
RunConfig parse_config(const std::string& text, const std::string& source);
RunConfig load_config(const std::string& path);

/// The system described by lambda, policy, Q and costs.
csl_system_desc system_desc(const RunConfig& cfg);

csl_mode parse_mode(const std::string& s);
csl_delay parse_delay(const std::string& s);
csl_policy_kind parse_policy_kind(const std::string& s);

}  // namespace cli
