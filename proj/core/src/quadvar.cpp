#include "incmart/quadvar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "incmart/errors.hpp"
#include "incmart/path_io.hpp"

namespace incmart {

std::string to_string(TailVerdict v) {
  switch (v) {
    case TailVerdict::converges: return "converges";
    case TailVerdict::diverges: return "diverges";
    case TailVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::size_t tail_window_size(std::size_t n) {
  const auto w = static_cast<std::size_t>(std::ceil(kTailFraction * static_cast<double>(n)));
  return std::min(n, std::max<std::size_t>(2, w));
}

TailStats tail_stats(std::span<const double> values) {
  TailStats s;
  s.window = tail_window_size(values.size());
  if (values.empty()) return s;
  double lo = values[0], hi = values[0];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) s.finite = false;
    lo = std::min(lo, values[i]);
    hi = std::max(hi, values[i]);
    if (i + 1 == s.window) s.oscillation = hi - lo;
  }
  s.range = hi - lo;
  return s;
}

TailVerdict tail_verdict(std::span<const double> values) {
  if (values.size() < 3) return TailVerdict::inconclusive;
  const TailStats s = tail_stats(values);
  if (!s.finite) return TailVerdict::inconclusive;
  return s.oscillation <= kTailRelTolerance * (1.0 + s.range) ? TailVerdict::converges
                                                                : TailVerdict::diverges;
}

QVReport realized_qv(const SamplePath& path, std::size_t s) {
  SamplePath qv = qv_path(path, s);
  std::vector<double> jumps = jump_sum_values(path, s);
  std::vector<double> cont(path.size());
  double defect = 0.0;
  for (std::size_t i = 0; i < cont.size(); ++i) {
    const double d = qv[i] - jumps[i];
    if (d < 0.0) defect = std::max(defect, -d);
    cont[i] = std::max(0.0, d);
  }
  std::vector<Jump<double>> jump_records;
  if (!path.continuous()) {
    for (std::size_t i = s + 1; i < path.size(); ++i) {
      if (jumps[i] != jumps[i - 1]) jump_records.push_back({i, jumps[i] - jumps[i - 1]});
    }
  }
  QVReport report{qv,
                  SamplePath(path.grid_ptr(), std::move(jumps), std::move(jump_records),
                             path.interpolation()),
                  SamplePath(path.grid_ptr(), std::move(cont), {},
                             Interpolation::linear_continuous),
                  TailVerdict::inconclusive, s, defect};
  report.tail = tail_verdict(report.qv.values());
  return report;
}

QVReport realized_qv(const SamplePath& path, double s) {
  return realized_qv(path, path.grid().snap(s));
}

void write_csv(std::ostream& out, const QVReport& report) {
  out << "time,qv,jump_sum,cont_est\n";
  const TimeGrid& g = report.qv.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << format_double(g[i]) << ',' << format_double(report.qv[i]) << ','
        << format_double(report.jump_sum[i]) << ',' << format_double(report.continuous[i])
        << '\n';
  }
}

nlohmann::ordered_json to_json(const QVReport& report) {
  nlohmann::ordered_json doc;
  const std::size_t last = report.qv.size() - 1;
  doc["from_time"] = report.qv.grid()[report.from];
  doc["qv_total"] = report.qv[last];
  doc["jump_sum_total"] = report.jump_sum[last];
  doc["continuous_total"] = report.continuous[last];
  doc["tail_verdict"] = to_string(report.tail);
  doc["clamp_defect"] = report.clamp_defect;
  return doc;
}

namespace {

double max_defect(const ExactPath& a, const ExactPath& b) {
  Exact worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max<Exact>(worst, abs(Exact(a[i] - b[i])));
  for (std::size_t i = 1; i < a.size(); ++i) {
    worst = std::max<Exact>(worst, abs(Exact(a.jump_at(i) - b.jump_at(i))));
  }
  return worst.get_d();
}

}  // namespace

StoppingIdentityReport qv_stopping_identity_check(const SamplePath& path, GridStop sigma,
                                                  std::size_t s) {
  if (s >= path.size()) throw RangeError("identity check start outside grid");
  const ExactPath m = to_exact(path);
  StoppingIdentityReport r;
  r.stopped_qv_defect = max_defect(stop(qv_path(m, 0), sigma), qv_path(stop(m, sigma), 0));
  r.increment_qv_defect = max_defect(increment(qv_path(m, 0), s), qv_path(increment(m, s), 0));
  r.passed = r.stopped_qv_defect == 0.0 && r.increment_qv_defect == 0.0;
  return r;
}

SamplePath predictable_qv_hazard(const PathBundle& bundle) {
  if (!bundle.compensator) {
    throw ArgumentError("predictable QV needs a hazard bundle with a compensator");
  }
  return *bundle.compensator;
}

ContingencyReport convergence_vs_qv_verdict(std::span<const SamplePath> paths,
                                            const std::string& model_name,
                                            double max_off_diagonal) {
  ContingencyReport r;
  r.model = model_name;
  for (const auto& p : paths) {
    // Judged on the root scale so both verdicts use the units of M.
    const SamplePath q = qv_path(p, 0);
    std::vector<double> root(q.size());
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(q[i]);
    const TailVerdict qv = tail_verdict(root);
    const TailVerdict v = tail_verdict(p.values());
    if (qv == TailVerdict::inconclusive || v == TailVerdict::inconclusive) {
      ++r.inconclusive;
      continue;
    }
    ++r.counts[qv == TailVerdict::converges][v == TailVerdict::converges];
  }
  const std::size_t conclusive = paths.size() - r.inconclusive;
  if (conclusive > 0) {
    const double n = static_cast<double>(conclusive);
    r.off_diagonal_fraction = static_cast<double>(r.counts[0][1] + r.counts[1][0]) / n;
    r.qv_diverges_value_stabilizes = static_cast<double>(r.counts[0][1]) / n;
  }
  r.passed = conclusive > 0 && (!r.diagonal_predicted || r.off_diagonal_fraction <= max_off_diagonal);
  return r;
}

nlohmann::ordered_json to_json(const ContingencyReport& r) {
  nlohmann::ordered_json doc;
  doc["model"] = r.model;
  doc["qv_stabilizes_value_stabilizes"] = r.counts[1][1];
  doc["qv_stabilizes_value_diverges"] = r.counts[1][0];
  doc["qv_diverges_value_stabilizes"] = r.counts[0][1];
  doc["qv_diverges_value_diverges"] = r.counts[0][0];
  doc["inconclusive"] = r.inconclusive;
  doc["diagonal_predicted"] = r.diagonal_predicted;
  doc["off_diagonal_fraction"] = r.off_diagonal_fraction;
  doc["passed"] = r.passed;
  return doc;
}

}  // namespace incmart
