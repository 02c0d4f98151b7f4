#include "incmart/stats_mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "incmart/errors.hpp"
#include "incmart/path_io.hpp"
#include "incmart/quadvar.hpp"

namespace incmart {

std::vector<SamplePath> Ensemble::paths() const {
  std::vector<SamplePath> out;
  out.reserve(bundles.size());
  for (const auto& b : bundles) out.push_back(b.path);
  return out;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

Ensemble run_ensemble(const ModelSpec& model, const GridPtr& grid, std::size_t n_paths,
                      std::uint64_t master_seed, unsigned threads, SampleOptions options) {
  if (n_paths < 1) throw ArgumentError("an ensemble needs at least one path");
  const Sampler sampler(model, grid, options);
  Ensemble e{model, grid, master_seed, std::vector<std::uint64_t>(n_paths), {}};
  std::vector<std::optional<PathBundle>> slots(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) e.seeds[i] = derive_seed(master_seed, i);
  parallel_for(n_paths, threads, [&](std::size_t i) { slots[i] = sampler(e.seeds[i]); });
  e.bundles.reserve(n_paths);
  for (auto& s : slots) e.bundles.push_back(std::move(*s));
  return e;
}

void write_ensemble_csv(std::ostream& out, const Ensemble& e) {
  out << "index,seed,value_first,value_last,min,max\n";
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto v = e.bundles[i].path.values();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    out << i << ',' << e.seeds[i] << ',' << format_double(v.front()) << ','
        << format_double(v.back()) << ',' << format_double(*lo) << ',' << format_double(*hi)
        << '\n';
  }
}

// ---- martingale test -----------------------------------------------------

namespace {

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

void check_common_grid(std::span<const SamplePath> paths) {
  if (paths.empty()) throw ArgumentError("no paths given");
  for (const auto& p : paths) {
    if (!same_grid(p.grid_ptr(), paths.front().grid_ptr())) {
      throw GridMismatchError("ensemble paths live on different grids");
    }
  }
}

}  // namespace

MeanTest mean_zero_test(std::span<const double> values, double z_max) {
  MeanTest r;
  r.count = values.size();
  if (r.count < 2) return r;
  const double n = static_cast<double>(r.count);
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.se = std::sqrt(ss / (n - 1.0) / n);
  r.z = r.se > 0.0 ? r.mean / r.se : (r.mean == 0.0 ? 0.0 : INFINITY);
  r.passed = std::fabs(r.z) <= z_max;
  return r;
}

Feature value_feature() {
  return [](const PathPrefix& p) { return p.current(); };
}

Feature increment_feature() {
  return [](const PathPrefix& p) { return p.current() - p.value(0); };
}

MartingaleTestReport martingale_test(std::span<const SamplePath> paths, double s, double t,
                                     const Feature& feature, std::size_t n_buckets,
                                     const std::string& feature_name) {
  check_common_grid(paths);
  if (!(s < t)) throw ArgumentError("martingale test needs s < t");
  if (n_buckets < 1) throw ArgumentError("martingale test needs at least one bucket");
  const TimeGrid& grid = paths.front().grid();
  const std::size_t si = grid.snap(s), ti = grid.snap(t);
  if (si >= ti) throw ArgumentError("s and t snap to the same grid time");

  const std::size_t n = paths.size();
  std::vector<double> feat(n), inc(n);
  for (std::size_t i = 0; i < n; ++i) {
    feat[i] = feature(PathPrefix(paths[i], si));
    inc[i] = paths[i][ti] - paths[i][si];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return feat[a] < feat[b]; });

  MartingaleTestReport r{grid[si], grid[ti], feature_name, {}, 0, 0.0, 1.0, false};
  std::size_t used = 0;
  for (std::size_t k = 0; k < n_buckets; ++k) {
    const std::size_t lo = k * n / n_buckets, hi = (k + 1) * n / n_buckets;
    Bucket b;
    b.count = hi - lo;
    if (b.count == 0) continue;
    std::vector<double> values;
    values.reserve(b.count);
    for (std::size_t j = lo; j < hi; ++j) values.push_back(inc[order[j]]);
    b.feature_lo = feat[order[lo]];
    b.feature_hi = feat[order[hi - 1]];
    const MeanTest m = mean_zero_test(values);
    b.mean = m.mean;
    b.se = m.se;
    b.z = m.z;
    b.excluded = b.count < kMinBucket;
    if (b.excluded) {
      ++r.excluded;
    } else {
      ++used;
      r.max_abs_z = std::max(r.max_abs_z, std::fabs(b.z));
    }
    r.buckets.push_back(b);
  }
  r.p_value = used == 0 ? 1.0
                        : std::min(1.0, static_cast<double>(used) * 2.0 * normal_upper_tail(r.max_abs_z));
  r.passed = used > 0 && r.max_abs_z <= kZThreshold;
  return r;
}

MartingaleTestReport martingale_test(const Ensemble& ensemble, double s, double t,
                                     const Feature& feature, std::size_t n_buckets,
                                     const std::string& feature_name) {
  const auto paths = ensemble.paths();
  return martingale_test(paths, s, t, feature, n_buckets, feature_name);
}

// ---- diagnostics ---------------------------------------------------------

std::vector<std::size_t> probe_indices(const TimeGrid& grid, std::size_t t_index,
                                       std::size_t count) {
  const double t = grid[t_index];
  const double d_max = t - grid.t_min();
  std::vector<std::size_t> out;
  if (d_max <= 0.0) return out;
  for (std::size_t j = 0; j < count; ++j) {
    const double d = d_max * std::pow(10.0, -3.0 * static_cast<double>(j) / 15.0);
    out.push_back(grid.snap(std::max(grid.t_min(), t - d)));
  }
  return out;
}

UIReport ui_diagnostic(std::span<const SamplePath> paths, double t, std::vector<double> cutoffs) {
  check_common_grid(paths);
  std::sort(cutoffs.begin(), cutoffs.end());
  const TimeGrid& grid = paths.front().grid();
  const std::size_t ti = grid.snap(t);
  const auto probes = probe_indices(grid, ti);
  UIReport r;
  r.t = grid[ti];
  r.cutoffs = cutoffs;
  r.tail.assign(cutoffs.size(), std::vector<double>(probes.size(), 0.0));
  const double n = static_cast<double>(paths.size());
  for (std::size_t j = 0; j < probes.size(); ++j) {
    r.probe_times.push_back(grid[probes[j]]);
    double mean_abs = 0.0;
    for (const auto& p : paths) {
      const double x = std::fabs(p[ti] - p[probes[j]]);
      mean_abs += x;
      for (std::size_t c = 0; c < cutoffs.size(); ++c) {
        if (x > cutoffs[c]) r.tail[c][j] += x;
      }
    }
    r.mean_abs.push_back(mean_abs / n);
    for (auto& row : r.tail) row[j] /= n;
  }
  if (!cutoffs.empty() && !probes.empty()) {
    const auto& last = r.tail.back();
    const double worst_tail = *std::max_element(last.begin(), last.end());
    const double scale = *std::max_element(r.mean_abs.begin(), r.mean_abs.end());
    r.decays = tail_verdict(last) == TailVerdict::converges && worst_tail <= 0.1 * scale;
  }
  return r;
}

L2Report l2_bound_diagnostic(std::span<const SamplePath> paths, double t) {
  check_common_grid(paths);
  const TimeGrid& grid = paths.front().grid();
  const std::size_t ti = grid.snap(t);
  L2Report r;
  r.t = grid[ti];
  for (std::size_t si : probe_indices(grid, ti)) {
    r.probe_times.push_back(grid[si]);
    double m2 = 0.0;
    for (const auto& p : paths) {
      const double x = p[ti] - p[si];
      m2 += x * x;
    }
    r.second_moment.push_back(m2 / static_cast<double>(paths.size()));
  }
  r.bounded = tail_verdict(r.second_moment) == TailVerdict::converges;
  return r;
}

LimitReport limit_detector(std::span<const SamplePath> paths, double tol) {
  check_common_grid(paths);
  LimitReport r;
  r.tol = tol;
  const std::size_t window = tail_window_size(paths.front().size());
  std::size_t stable = 0;
  std::vector<std::size_t> small(window, 0);
  for (const auto& p : paths) {
    const TailStats s = tail_stats(p.values());
    if (s.finite && s.oscillation <= tol) ++stable;
    for (std::size_t i = 0; i < window; ++i) {
      if (std::fabs(p[i]) <= tol) ++small[i];
    }
  }
  const double n = static_cast<double>(paths.size());
  r.as_fraction = static_cast<double>(stable) / n;
  double sum = 0.0, worst = 1.0;
  for (std::size_t c : small) {
    const double f = static_cast<double>(c) / n;
    sum += f;
    worst = std::min(worst, f);
  }
  r.in_probability_fraction = sum / static_cast<double>(window);
  r.in_probability_min = worst;
  r.separation = r.in_probability_fraction - r.as_fraction;
  return r;
}

GridStop canonical_localizer(const SamplePath& path, double anchor, double level) {
  if (!(level > 0.0)) throw ArgumentError("localizer level must be positive");
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (std::fabs(path[i] - anchor) > level) return i;
  }
  return std::nullopt;
}

// ---- reports -------------------------------------------------------------

nlohmann::ordered_json to_json(const MartingaleTestReport& r) {
  nlohmann::ordered_json doc;
  doc["s"] = r.s;
  doc["t"] = r.t;
  doc["feature"] = r.feature;
  doc["max_abs_z"] = r.max_abs_z;
  doc["p_value"] = r.p_value;
  doc["excluded_buckets"] = r.excluded;
  doc["passed"] = r.passed;
  auto& buckets = doc["buckets"] = nlohmann::ordered_json::array();
  for (const auto& b : r.buckets) {
    buckets.push_back({{"count", b.count},
                       {"feature_lo", b.feature_lo},
                       {"feature_hi", b.feature_hi},
                       {"mean", b.mean},
                       {"se", b.se},
                       {"z", b.z},
                       {"excluded", b.excluded}});
  }
  return doc;
}

nlohmann::ordered_json to_json(const MeanTest& r) {
  return {{"count", r.count}, {"mean", r.mean}, {"se", r.se}, {"z", r.z}, {"passed", r.passed}};
}

nlohmann::ordered_json to_json(const UIReport& r) {
  nlohmann::ordered_json doc;
  doc["t"] = r.t;
  doc["probe_times"] = r.probe_times;
  doc["cutoffs"] = r.cutoffs;
  doc["mean_abs"] = r.mean_abs;
  doc["tail"] = r.tail;
  doc["decays"] = r.decays;
  return doc;
}

nlohmann::ordered_json to_json(const L2Report& r) {
  nlohmann::ordered_json doc;
  doc["t"] = r.t;
  doc["probe_times"] = r.probe_times;
  doc["second_moment"] = r.second_moment;
  doc["bounded"] = r.bounded;
  return doc;
}

nlohmann::ordered_json to_json(const LimitReport& r) {
  return {{"tol", r.tol},
          {"as_fraction", r.as_fraction},
          {"in_probability_fraction", r.in_probability_fraction},
          {"in_probability_min", r.in_probability_min},
          {"separation", r.separation}};
}

namespace {

std::string line(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

}  // namespace

std::string to_text(const MartingaleTestReport& r) {
  std::string out = line("martingale test  s=%g  t=%g  feature=%s\n", r.s, r.t, r.feature.c_str());
  out += line("%8s %14s %14s %12s %12s %8s\n", "count", "feature_lo", "feature_hi", "mean", "se", "z");
  for (const auto& b : r.buckets) {
    out += line("%8zu %14.6g %14.6g %12.4g %12.4g %8.3f%s\n", b.count, b.feature_lo, b.feature_hi,
                b.mean, b.se, b.z, b.excluded ? "  (excluded)" : "");
  }
  out += line("max |z| = %.3f  p = %.3g  %s\n", r.max_abs_z, r.p_value, r.passed ? "PASS" : "FAIL");
  return out;
}

std::string to_text(const UIReport& r) {
  std::string out = line("UI diagnostic  t=%g\n%12s %12s", r.t, "s", "E|sM|");
  for (double c : r.cutoffs) out += line(" %12s", ("c=" + format_double(c)).c_str());
  out += "\n";
  for (std::size_t j = 0; j < r.probe_times.size(); ++j) {
    out += line("%12.5g %12.5g", r.probe_times[j], r.mean_abs[j]);
    for (const auto& row : r.tail) out += line(" %12.5g", row[j]);
    out += "\n";
  }
  out += r.decays ? "tail decays uniformly: UI proxy holds\n" : "no uniform decay: not UI\n";
  return out;
}

std::string to_text(const L2Report& r) {
  std::string out = line("L2 diagnostic  t=%g\n%12s %14s\n", r.t, "s", "E[(sM)^2]");
  for (std::size_t j = 0; j < r.probe_times.size(); ++j) {
    out += line("%12.5g %14.6g\n", r.probe_times[j], r.second_moment[j]);
  }
  out += r.bounded ? "bounded\n" : "unbounded\n";
  return out;
}

std::string to_text(const LimitReport& r) {
  return line("limit detector  tol=%g\n  a.s.-style fraction     %.4f\n"
              "  in-probability fraction %.4f (min %.4f)\n  separation              %.4f\n",
              r.tol, r.as_fraction, r.in_probability_fraction, r.in_probability_min,
              r.separation);
}

}  // namespace incmart
