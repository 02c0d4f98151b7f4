#pragma once

// Deterministic ensemble runner and the statistical test battery.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmart/process_zoo.hpp"
#include "incmart/rng.hpp"
#include "incmart/sample_path.hpp"

namespace incmart {

struct Ensemble {
  ModelSpec model;
  GridPtr grid;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;  // seeds[i] = derive_seed(master_seed, i)
  std::vector<PathBundle> bundles;

  std::size_t size() const { return bundles.size(); }
  /// The primary path of every bundle, in index order.
  std::vector<SamplePath> paths() const;
};

/// Samples n_paths bundles on `threads` worker threads. The result does not
/// depend on the thread count.
Ensemble run_ensemble(const ModelSpec& model, const GridPtr& grid, std::size_t n_paths,
                      std::uint64_t master_seed, unsigned threads = 1,
                      SampleOptions options = {});

/// Index-parallel map with results stored by index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

void write_ensemble_csv(std::ostream& out, const Ensemble& ensemble);

// ---- martingale test -----------------------------------------------------

inline constexpr double kZThreshold = 4.0;
inline constexpr std::size_t kMinBucket = 30;

using Feature = std::function<double(const PathPrefix&)>;

struct Bucket {
  std::size_t count = 0;
  double feature_lo = 0.0;
  double feature_hi = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool excluded = false;  // fewer than kMinBucket paths
};

struct MartingaleTestReport {
  double s = 0.0;
  double t = 0.0;
  std::string feature;
  std::vector<Bucket> buckets;
  std::size_t excluded = 0;
  double max_abs_z = 0.0;
  double p_value = 1.0;  // Bonferroni over the buckets used
  bool passed = false;
};

/// Buckets paths by quantiles of `feature` (which sees the path only up to s)
/// and tests E[sM_t | bucket] = 0 per bucket with |z| <= 4.
MartingaleTestReport martingale_test(std::span<const SamplePath> paths, double s, double t,
                                     const Feature& feature, std::size_t n_buckets,
                                     const std::string& feature_name = "X_s");
MartingaleTestReport martingale_test(const Ensemble& ensemble, double s, double t,
                                     const Feature& feature, std::size_t n_buckets,
                                     const std::string& feature_name = "X_s");

/// Feature reading the current value X_s. Only valid for adapted X.
Feature value_feature();

/// X_s - X_{t_min}. Paths pinned to 0 at a later time make X_s itself look
/// ahead; this increment never does.
Feature increment_feature();

struct MeanTest {
  std::size_t count = 0;
  double mean = 0.0;
  double se = 0.0;
  double z = 0.0;
  bool passed = false;
};

/// z-test of mean zero with the |z| <= 4 rule.
MeanTest mean_zero_test(std::span<const double> values, double z_max = kZThreshold);

// ---- UI, L2 and limit diagnostics ----------------------------------------

/// 16 grid indices s_j = t - d_max 10^(-3j/15), earliest first.
std::vector<std::size_t> probe_indices(const TimeGrid& grid, std::size_t t_index,
                                       std::size_t count = 16);

struct UIReport {
  double t = 0.0;
  std::vector<double> probe_times;
  std::vector<double> cutoffs;
  std::vector<double> mean_abs;               // E|sM_t| per probe
  std::vector<std::vector<double>> tail;      // tail[c][j] = E[|sM_t| 1{|sM_t| > c}]
  bool decays = false;
};

UIReport ui_diagnostic(std::span<const SamplePath> paths, double t, std::vector<double> cutoffs);

struct L2Report {
  double t = 0.0;
  std::vector<double> probe_times;
  std::vector<double> second_moment;
  bool bounded = false;
};

L2Report l2_bound_diagnostic(std::span<const SamplePath> paths, double t);

struct LimitReport {
  double tol = 0.0;
  double as_fraction = 0.0;            // paths whose tail oscillation <= tol
  double in_probability_fraction = 0.0;  // mean over the earliest window of P(|X_t| <= tol)
  double in_probability_min = 0.0;       // worst time in that window
  double separation = 0.0;
};

LimitReport limit_detector(std::span<const SamplePath> paths, double tol = 1e-2);

/// First grid index with |X - anchor| > level, nullopt if none.
GridStop canonical_localizer(const SamplePath& path, double anchor, double level);

nlohmann::ordered_json to_json(const MartingaleTestReport& r);
nlohmann::ordered_json to_json(const MeanTest& r);
nlohmann::ordered_json to_json(const UIReport& r);
nlohmann::ordered_json to_json(const L2Report& r);
nlohmann::ordered_json to_json(const LimitReport& r);

std::string to_text(const MartingaleTestReport& r);
std::string to_text(const UIReport& r);
std::string to_text(const L2Report& r);
std::string to_text(const LimitReport& r);

}  // namespace incmart
