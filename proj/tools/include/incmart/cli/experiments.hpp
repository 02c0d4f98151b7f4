#pragma once

// Registry of reproducible experiments. Every entry carries a default config
// (the same text as configs/<name>.conf), its checks and a runtime budget.

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmart/cli/artifacts.hpp"
#include "incmart/cli/config.hpp"

namespace incmart::cli {

inline constexpr int kCsvSchemaVersion = 1;
inline constexpr int kSummarySchemaVersion = 1;

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunResult {
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<Check> checks;
  ArtifactSet artifacts;

  bool passed() const;
  void check(std::string name, bool passed, std::string detail);
};

struct Experiment {
  std::string name;
  std::string description;
  double budget_seconds = 0.0;
  std::string default_config;
  std::function<RunResult(const ExperimentConfig&)> run;
};

const std::vector<Experiment>& registry();

/// ConfigurationError naming the valid set when `name` is unknown.
const Experiment& find_experiment(const std::string& name);

ExperimentConfig default_config(const Experiment& experiment);

struct Outcome {
  RunResult result;
  double seconds = 0.0;
  bool within_budget = true;  // always true for runs without a budget
  ArtifactSet files;          // result artifacts plus summary.json and run_meta.json
};

/// Runs and assembles the output files. summary.json depends only on the
/// config (never on timing or thread count); run_meta.json holds the rest.
Outcome run_and_package(const std::string& name, double budget_seconds,
                        const std::function<RunResult(const ExperimentConfig&)>& run,
                        const ExperimentConfig& config);

Outcome run_experiment(const Experiment& experiment, const ExperimentConfig& config);

/// Config fields that affect results, as stable JSON.
nlohmann::ordered_json config_json(const ExperimentConfig& config);

/// JSON list of the failed checks, for stderr.
nlohmann::ordered_json failure_list(const RunResult& result);

}  // namespace incmart::cli
