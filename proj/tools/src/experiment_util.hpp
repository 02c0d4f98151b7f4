#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "incmart/cli/experiments.hpp"
#include "incmart/cli/svg.hpp"
#include "incmart/exact.hpp"
#include "incmart/path_io.hpp"
#include "incmart/sample_path.hpp"
#include "incmart/stats_mc.hpp"

namespace incmart::cli::detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

/// Max |a - b| over values and recorded jumps, exactly.
inline Exact path_defect(const ExactPath& a, const ExactPath& b) {
  Exact worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max<Exact>(worst, abs(Exact(a[i] - b[i])));
  }
  for (std::size_t i = 1; i < a.size(); ++i) {
    worst = std::max<Exact>(worst, abs(Exact(a.jump_at(i) - b.jump_at(i))));
  }
  return worst;
}

inline Series series_of(const std::string& label, const SamplePath& p) {
  const auto t = p.grid().times();
  return {label, std::vector<double>(t.begin(), t.end()),
          std::vector<double>(p.values().begin(), p.values().end())};
}

/// Fan chart of the first `count` paths.
inline std::string fan_chart(const std::string& title, const std::vector<SamplePath>& paths,
                             std::size_t count = 12) {
  std::vector<Series> s;
  for (std::size_t i = 0; i < std::min(count, paths.size()); ++i) {
    s.push_back(series_of("path " + std::to_string(i), paths[i]));
  }
  return line_chart(title, s, "t", "X_t");
}

/// CSV from a header and rows of doubles, 17 significant digits.
inline std::string table_csv(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
  return out.str();
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  const double hi = v[k];
  if (v.size() % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
  return 0.5 * (lo + hi);
}

inline std::string bucket_csv(const MartingaleTestReport& m) {
  std::vector<std::vector<double>> rows;
  for (std::size_t b = 0; b < m.buckets.size(); ++b) {
    const Bucket& k = m.buckets[b];
    rows.push_back({static_cast<double>(b), static_cast<double>(k.count), k.feature_lo,
                    k.feature_hi, k.mean, k.se, k.z, k.excluded ? 1.0 : 0.0});
  }
  return table_csv({"bucket", "count", "feature_lo", "feature_hi", "mean", "se", "z", "excluded"},
                   rows);
}

inline std::string z_chart(const std::string& title, const MartingaleTestReport& m) {
  std::vector<std::string> labels;
  std::vector<double> z;
  for (std::size_t b = 0; b < m.buckets.size(); ++b) {
    labels.push_back("b" + std::to_string(b));
    z.push_back(m.buckets[b].z);
  }
  return bar_chart(title, labels, z, {-kZThreshold, kZThreshold});
}

// Experiment bodies, one per registry entry.
RunResult run_core_identities(const ExperimentConfig& c);
RunResult run_prop_3_7_decomposition(const ExperimentConfig& c);
RunResult run_qv_brownian(const ExperimentConfig& c);
RunResult run_hazard_martingale(const ExperimentConfig& c);
RunResult run_heavy_tail_divergence(const ExperimentConfig& c);
RunResult run_borel_cantelli_modes(const ExperimentConfig& c);
RunResult run_integral_properties(const ExperimentConfig& c);
RunResult run_improper_iff_ll1(const ExperimentConfig& c);
RunResult run_time_change_levy(const ExperimentConfig& c);
RunResult run_inverse_bessel3_entrance(const ExperimentConfig& c);
RunResult run_convergence_vs_qv(const ExperimentConfig& c);

}  // namespace incmart::cli::detail
