#pragma once

// Exact finite filtered probability spaces. Conditional expectations are
// block averages, so martingale identities can be checked to rounding level.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace incmart {

inline constexpr double kFiniteTolerance = 1e-10;

class FiniteFilteredSpace {
 public:
  /// `block_ids[k][w]` is the block of outcome w in the partition at times[k].
  /// Partitions must refine as k grows: outcomes sharing a block at k + 1
  /// share a block at k.
  FiniteFilteredSpace(std::vector<double> probabilities, std::vector<double> times,
                      std::vector<std::vector<std::size_t>> block_ids);

  /// Binary tree of the given depth: outcome bits are revealed one per time
  /// step, most significant first. `up_probability(level, node)` is the
  /// probability of bit 1 below the node (node = bits revealed so far).
  static FiniteFilteredSpace binary_tree(
      std::size_t depth, std::vector<double> times,
      const std::function<double(std::size_t, std::size_t)>& up_probability);

  std::size_t outcomes() const { return probabilities_.size(); }
  std::size_t n_times() const { return times_.size(); }
  std::span<const double> probabilities() const { return probabilities_; }
  std::span<const double> times() const { return times_; }
  std::size_t block(std::size_t k, std::size_t w) const { return block_ids_[k][w]; }
  std::size_t n_blocks(std::size_t k) const { return n_blocks_[k]; }
  const std::vector<std::vector<std::size_t>>& block_ids() const { return block_ids_; }

  /// Per-outcome E[x | F_{t_k}].
  std::vector<double> conditional_expectation(std::span<const double> x, std::size_t k) const;
  double expectation(std::span<const double> x) const;

  /// Max deviation of x from its block averages at time k (0 iff measurable).
  double measurability_defect(std::span<const double> x, std::size_t k) const;

  nlohmann::ordered_json to_json() const;
  static FiniteFilteredSpace from_json(const nlohmann::json& doc);

 private:
  std::vector<double> probabilities_;
  std::vector<double> times_;
  std::vector<std::vector<std::size_t>> block_ids_;
  std::vector<std::size_t> n_blocks_;
};

/// A real process on a finite space: values[k][w] at time index k.
class FiniteProcess {
 public:
  FiniteProcess() = default;
  FiniteProcess(std::size_t n_times, std::size_t outcomes, double fill = 0.0)
      : values_(n_times, std::vector<double>(outcomes, fill)) {}
  explicit FiniteProcess(std::vector<std::vector<double>> values);

  std::size_t n_times() const { return values_.size(); }
  std::size_t outcomes() const { return values_.empty() ? 0 : values_.front().size(); }
  double& at(std::size_t k, std::size_t w) { return values_[k][w]; }
  double at(std::size_t k, std::size_t w) const { return values_[k][w]; }
  std::span<const double> column(std::size_t k) const { return values_[k]; }
  std::span<double> column(std::size_t k) { return values_[k]; }
  const std::vector<std::vector<double>>& values() const { return values_; }

  FiniteProcess operator+(const FiniteProcess& other) const;
  FiniteProcess operator-(const FiniteProcess& other) const;
  FiniteProcess operator*(double a) const;
  double max_abs_difference(const FiniteProcess& other) const;

  nlohmann::ordered_json to_json() const;
  static FiniteProcess from_json(const nlohmann::json& doc);

 private:
  std::vector<std::vector<double>> values_;
};

/// Process validated to be adapted: column k is F_{t_k}-measurable.
class AdaptedFiniteProcess {
 public:
  AdaptedFiniteProcess(const FiniteFilteredSpace& space, FiniteProcess values,
                       double tol = 1e-12);
  const FiniteProcess& process() const { return values_; }
  operator const FiniteProcess&() const { return values_; }

 private:
  FiniteProcess values_;
};

/// Per-outcome stopping index into the space's times; nullopt is +inf.
class FiniteStoppingTime {
 public:
  FiniteStoppingTime(const FiniteFilteredSpace& space,
                     std::vector<std::optional<std::size_t>> index);
  static FiniteStoppingTime constant(const FiniteFilteredSpace& space,
                                     std::optional<std::size_t> index);
  /// First k with |X_k| >= level (X adapted), else +inf.
  static FiniteStoppingTime first_hit(const FiniteFilteredSpace& space,
                                      const FiniteProcess& x, double level);

  std::optional<std::size_t> operator[](std::size_t w) const { return index_[w]; }
  std::size_t outcomes() const { return index_.size(); }

 private:
  std::vector<std::optional<std::size_t>> index_;
};

struct MartingaleVerdict {
  bool holds = false;
  double max_defect = 0.0;
};

bool is_adapted(const FiniteFilteredSpace& space, const FiniteProcess& x, double tol = 1e-12);

/// max over k < l of |E[M_l | F_k] - M_k|; AdaptednessError if M is not adapted.
MartingaleVerdict is_martingale(const FiniteFilteredSpace& space, const FiniteProcess& m,
                                double tol = kFiniteTolerance);

/// max over k < l of |E[M_l - M_k | F_k]|. M itself need not be adapted,
/// but every increment M_l - M_k must be F_l-measurable.
MartingaleVerdict check_increment_martingale(const FiniteFilteredSpace& space,
                                             const FiniteProcess& m,
                                             double tol = kFiniteTolerance);

struct Decomposition {
  FiniteProcess martingale;  // K_t = E[M_t | F_t]
  FiniteProcess remainder;   // N = M - K, with E[N_t | F_t] = 0
};

/// M = K + N with K a martingale and N conditionally centred at each time.
/// Throws ArgumentError unless M is an increment martingale.
Decomposition decompose(const FiniteFilteredSpace& space, const FiniteProcess& m,
                        double tol = kFiniteTolerance);

/// X^sigma: value at t_k is X at min(t_k, sigma).
FiniteProcess stop(const FiniteFilteredSpace& space, const FiniteProcess& x,
                   const FiniteStoppingTime& sigma);

/// The increment after a stopping time, tau M_t = M_t - M_{t ^ tau}.
FiniteProcess increment_after(const FiniteFilteredSpace& space, const FiniteProcess& m,
                              const FiniteStoppingTime& tau);

/// E[X_t^2] for each time index.
std::vector<double> second_moments(const FiniteFilteredSpace& space, const FiniteProcess& x);

}  // namespace incmart
