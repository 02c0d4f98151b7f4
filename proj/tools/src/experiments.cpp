#include "incmart/cli/experiments.hpp"

#include <chrono>
#include <ctime>

#include "experiment_util.hpp"
#include "incmart/errors.hpp"
#include "incmart/process_zoo.hpp"

namespace incmart::cli {

bool RunResult::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

void RunResult::check(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

namespace {

std::vector<Experiment> build_registry() {
  using namespace detail;
  return {
      {"core_identities",
       "Increment additivity, increments of increments, associate round trip and stopping, "
       "exactly on random paths",
       5.0,
       R"(name = core_identities
model = levy_r
grid = -10:10:400
paths = 100
seed = 1

[model]
rate = 2
jump_law = normal
)",
       run_core_identities},
      {"prop_3_7_decomposition",
       "Martingale plus conditionally centred remainder on a binary tree (depth = grid cells)",
       5.0,
       R"(name = prop_3_7_decomposition
grid = -4:4:8
paths = 1
seed = 1
)",
       run_prop_3_7_decomposition},
      {"qv_brownian", "Realized QV of Brownian motion on [0, 1]", 10.0,
       R"(name = qv_brownian
model = brownian_r
grid = 0:1:16384
paths = 256
seed = 1
)",
       run_qv_brownian},
      {"hazard_martingale",
       "Compensated event time with logistic law: martingale test, M^2 - A, [M] = N, A_0",
       30.0,
       R"(name = hazard_martingale
model = hazard_pair
grid = -20:5:250
paths = 20000
seed = 1

[model]
law = logistic

[test]
s = -1
t = 2
buckets = 5
times = -1, 0, 2
cutoffs = 0.5, 1, 2
refine_cells = 1000
refine_paths = 2000
)",
       run_hazard_martingale},
      {"heavy_tail_divergence",
       "Slow-tail hazard: sB_0 diverges while X1 - X2 settles at -inf", 10.0,
       R"(name = heavy_tail_divergence
model = hazard_pair
grid = -10000:5:2000
spacing = log_tail
paths = 1000
seed = 1

[model]
law = heavy_tail

[test]
tol = 0.01
)",
       run_heavy_tail_divergence},
      {"borel_cantelli_modes",
       "Borel-Cantelli bumps: convergence in probability without almost-sure convergence", 60.0,
       R"(name = borel_cantelli_modes
model = borel_cantelli
grid = -200:0:8000
spacing = log_tail
paths = 1000
seed = 1

[model]
n_max = 200
level = 1
phi_max = 1000

[test]
tol = 0.01
)",
       run_borel_cantelli_modes},
      {"integral_properties",
       "Increment structure, linearity, jumps, QV, stopping and associativity of the integral",
       10.0,
       R"(name = integral_properties
model = levy_r
grid = -5:5:500
paths = 100
seed = 1

[model]
rate = 2
jump_law = normal

[integrand]
phi = exp(0.5)

[test]
s = -1
level = 1
)",
       run_integral_properties},
      {"improper_iff_ll1",
       "LL1 verdict against convergence of the integral from -inf, for exp(1) and const(1)",
       30.0,
       R"(name = improper_iff_ll1
model = bump
grid = -40:0:4000
paths = 1000
seed = 1

[model]
a = -10
b = -5
level = 1
phi_max = 1000
)",
       run_improper_iff_ll1},
      {"time_change_levy", "Recovering Brownian motion from X = sigma (in) B", 10.0,
       R"(name = time_change_levy
model = brownian_r
grid = 0:5:5000
paths = 20
seed = 1
)",
       run_time_change_levy},
      {"inverse_bessel3_entrance",
       "Inverse BES(3): martingale increments away from the boundary, entrance from +inf", 60.0,
       R"(name = inverse_bessel3_entrance
model = inverse_bessel3
grid = -12:2:280
paths = 10000
seed = 1

[model]
epsilon = 0.1

[test]
epsilons = 0.1, 0.05
s = -10
t = -9.5
buckets = 5
)",
       run_inverse_bessel3_entrance},
      {"convergence_vs_qv",
       "Tail verdicts of M and of [M] agree on brownian_r, bump and borel_cantelli", 60.0,
       R"(name = convergence_vs_qv
grid = -50:0:5000
paths = 1000
seed = 1

[test]
max_off_diagonal = 0.05
)",
       run_convergence_vs_qv},
  };
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = build_registry();
  return r;
}

const Experiment& find_experiment(const std::string& name) {
  std::string valid;
  for (const auto& e : registry()) {
    if (e.name == name) return e;
    valid += (valid.empty() ? "" : ", ") + e.name;
  }
  throw ConfigurationError("experiment: unknown name '" + name + "' (valid: " + valid + ")");
}

ExperimentConfig default_config(const Experiment& experiment) {
  return parse_config(experiment.default_config);
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json doc;
  doc["name"] = c.name;
  if (c.model_name) {
    doc["model"] = model_name(c.model);
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : model_params(c.model)) params[k] = v;
    doc["model_params"] = params;
  } else {
    doc["model"] = nullptr;
  }
  doc["grid"] = {{"t_min", c.grid.t_min},
                 {"t_max", c.grid.t_max},
                 {"n_cells", c.grid.n_cells},
                 {"spacing", to_string(c.grid.spacing)}};
  doc["paths"] = c.n_paths;
  doc["seed"] = c.seed;
  doc["test"] = c.test;
  doc["integrand"] = c.integrand;
  return doc;
}

nlohmann::ordered_json failure_list(const RunResult& result) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& c : result.checks) {
    if (!c.passed) list.push_back({{"check", c.name}, {"detail", c.detail}});
  }
  return list;
}

Outcome run_and_package(const std::string& name, double budget_seconds,
                        const std::function<RunResult(const ExperimentConfig&)>& run,
                        const ExperimentConfig& config) {
  validate(config);
  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.result = run(config);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.within_budget = budget_seconds <= 0.0 || o.seconds <= budget_seconds;
  o.files = o.result.artifacts;

  nlohmann::ordered_json summary;
  summary["schema_version"] = kSummarySchemaVersion;
  summary["csv_schema_version"] = kCsvSchemaVersion;
  summary["experiment"] = name;
  summary["config"] = config_json(config);
  summary["passed"] = o.result.passed();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : o.result.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  summary["checks"] = checks;
  summary["results"] = o.result.results;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [file, content] : o.result.artifacts.files()) files.push_back(file);
  summary["files"] = files;
  o.files.add("summary.json", summary.dump(2) + "\n");

  nlohmann::ordered_json meta;
  meta["experiment"] = name;
  meta["started_utc"] = started;
  meta["elapsed_seconds"] = o.seconds;
  meta["budget_seconds"] = budget_seconds;
  meta["within_budget"] = o.within_budget;
  meta["threads"] = config.threads;
  o.files.add("run_meta.json", meta.dump(2) + "\n");
  return o;
}

Outcome run_experiment(const Experiment& experiment, const ExperimentConfig& config) {
  return run_and_package(experiment.name, experiment.budget_seconds, experiment.run, config);
}

}  // namespace incmart::cli
