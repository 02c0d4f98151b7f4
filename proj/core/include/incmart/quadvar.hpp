#pragma once

// Realized quadratic variation, its jump/continuous split, predictable QV for
// hazard models and the tail-stabilization criterion shared by the
// convergence diagnostics.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmart/increments.hpp"
#include "incmart/process_zoo.hpp"
#include "incmart/sample_path.hpp"

namespace incmart {

// ---- tail stabilization --------------------------------------------------

enum class TailVerdict { converges, diverges, inconclusive };
std::string to_string(TailVerdict v);

inline constexpr double kTailFraction = 0.1;
inline constexpr double kTailRelTolerance = 1e-2;

/// Number of earliest points inspected: ceil(10%) of n, at least 2.
std::size_t tail_window_size(std::size_t n);

struct TailStats {
  double oscillation = 0.0;  // max - min over the earliest window
  double range = 0.0;        // max - min over everything
  std::size_t window = 0;
  bool finite = true;
};

TailStats tail_stats(std::span<const double> values);

/// converges iff oscillation <= 1e-2 * (1 + range); inconclusive for fewer
/// than 3 points or non-finite values.
TailVerdict tail_verdict(std::span<const double> values);

// ---- realized QV kernels -------------------------------------------------

/// Cumulative sum of squared cell increments over cells after index s.
/// Jumps of M after s show up as jumps (Delta M)^2 of the result.
template <class T>
BasicPath<T> qv_path(const BasicPath<T>& m, std::size_t s) {
  if (s >= m.size()) throw RangeError("qv start outside grid");
  std::vector<T> values(m.size(), T(0));
  for (std::size_t i = s + 1; i < m.size(); ++i) {
    const T d = m[i] - m[i - 1];
    values[i] = values[i - 1] + d * d;
  }
  std::vector<Jump<T>> jumps;
  for (const auto& j : m.jumps()) {
    if (j.index > s) jumps.push_back({j.index, T(j.size * j.size)});
  }
  return BasicPath<T>(m.grid_ptr(), std::move(values), std::move(jumps), m.interpolation());
}

/// Cumulative sum of squared recorded jumps after index s.
template <class T>
std::vector<T> jump_sum_values(const BasicPath<T>& m, std::size_t s) {
  std::vector<T> values(m.size(), T(0));
  for (std::size_t i = s + 1; i < m.size(); ++i) {
    const T j = m.jump_at(i);
    values[i] = values[i - 1] + j * j;
  }
  return values;
}

struct QVReport {
  SamplePath qv;          // [M] accumulated from s
  SamplePath jump_sum;    // sum of (Delta M)^2 from s
  SamplePath continuous;  // qv - jump_sum, clamped at 0
  TailVerdict tail = TailVerdict::inconclusive;
  std::size_t from = 0;
  // Largest amount by which qv - jump_sum fell below 0 before clamping.
  double clamp_defect = 0.0;
};

QVReport realized_qv(const SamplePath& path, std::size_t s = 0);
QVReport realized_qv(const SamplePath& path, double s);

void write_csv(std::ostream& out, const QVReport& report);
nlohmann::ordered_json to_json(const QVReport& report);

struct StoppingIdentityReport {
  double stopped_qv_defect = 0.0;    // ([M]^g)^sigma vs [M^sigma]^g
  double increment_qv_defect = 0.0;  // s([M]^g) vs [sM]
  bool passed = false;
};

/// Both identities evaluated in exact arithmetic on the realized path.
StoppingIdentityReport qv_stopping_identity_check(const SamplePath& path, GridStop sigma,
                                                  std::size_t s);

/// <M> for a hazard bundle, which is its compensator A.
SamplePath predictable_qv_hazard(const PathBundle& bundle);

// ---- convergence vs QV ---------------------------------------------------

struct ContingencyReport {
  std::string model;
  // counts[q][v]: q = 1 if the QV tail stabilizes, v = 1 if the value tail does.
  std::array<std::array<std::size_t, 2>, 2> counts{};
  std::size_t inconclusive = 0;
  bool diagonal_predicted = true;
  double off_diagonal_fraction = 0.0;
  // Share of paths whose QV diverges while the value stabilizes.
  double qv_diverges_value_stabilizes = 0.0;
  bool passed = false;
};

/// Classifies each path by the tail behaviour of its realized QV (from t_min,
/// taken as sqrt([M]) so it is measured in the units of M) and of its
/// values. The theorems predict the diagonal; passes iff the off-diagonal
/// fraction is at most `max_off_diagonal`.
ContingencyReport convergence_vs_qv_verdict(std::span<const SamplePath> paths,
                                            const std::string& model_name,
                                            double max_off_diagonal = 0.05);

nlohmann::ordered_json to_json(const ContingencyReport& report);

}  // namespace incmart
