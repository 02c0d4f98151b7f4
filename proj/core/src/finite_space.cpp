#include "incmart/finite_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "incmart/errors.hpp"

namespace incmart {

namespace {

double scale_of(std::span<const double> x) {
  double m = 1.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

FiniteFilteredSpace::FiniteFilteredSpace(std::vector<double> probabilities,
                                         std::vector<double> times,
                                         std::vector<std::vector<std::size_t>> block_ids)
    : probabilities_(std::move(probabilities)),
      times_(std::move(times)),
      block_ids_(std::move(block_ids)) {
  const std::size_t n = probabilities_.size();
  if (n == 0) throw ArgumentError("finite space needs at least one outcome");
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p > 0.0)) throw ArgumentError("outcome probabilities must be positive");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ArgumentError("outcome probabilities sum to " + std::to_string(total));
  }
  if (times_.empty()) throw ArgumentError("finite space needs at least one time");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw ArgumentError("times must increase strictly");
  }
  if (block_ids_.size() != times_.size()) {
    throw ArgumentError("need one partition per time");
  }

  // Relabel blocks 0..B-1 in order of first appearance.
  n_blocks_.resize(times_.size());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    auto& ids = block_ids_[k];
    if (ids.size() != n) throw ArgumentError("partition size differs from outcome count");
    std::unordered_map<std::size_t, std::size_t> relabel;
    for (auto& id : ids) {
      auto [it, inserted] = relabel.emplace(id, relabel.size());
      id = it->second;
    }
    n_blocks_[k] = relabel.size();
  }

  // Filtration grows: each later block sits inside one earlier block.
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    std::vector<std::size_t> parent(n_blocks_[k + 1], n);
    for (std::size_t w = 0; w < n; ++w) {
      auto& p = parent[block_ids_[k + 1][w]];
      if (p == n) {
        p = block_ids_[k][w];
      } else if (p != block_ids_[k][w]) {
        throw ArgumentError("partition at time index " + std::to_string(k + 1) +
                            " does not refine the one at " + std::to_string(k));
      }
    }
  }
}

FiniteFilteredSpace FiniteFilteredSpace::binary_tree(
    std::size_t depth, std::vector<double> times,
    const std::function<double(std::size_t, std::size_t)>& up_probability) {
  if (depth == 0 || depth > 20) throw ArgumentError("binary tree depth must be in [1, 20]");
  if (times.size() != depth + 1) throw ArgumentError("binary tree needs depth + 1 times");
  const std::size_t n = std::size_t{1} << depth;
  std::vector<double> probs(n, 1.0);
  std::vector<std::vector<std::size_t>> blocks(depth + 1, std::vector<std::size_t>(n));
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t level = 0; level <= depth; ++level) {
      blocks[level][w] = w >> (depth - level);
    }
    for (std::size_t level = 0; level < depth; ++level) {
      const std::size_t node = w >> (depth - level);
      const bool up = (w >> (depth - level - 1)) & 1U;
      const double q = up_probability(level, node);
      if (!(q > 0.0 && q < 1.0)) throw ArgumentError("branch probability must be in (0,1)");
      probs[w] *= up ? q : 1.0 - q;
    }
  }
  // Renormalise away the product rounding.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  return FiniteFilteredSpace(std::move(probs), std::move(times), std::move(blocks));
}

std::vector<double> FiniteFilteredSpace::conditional_expectation(std::span<const double> x,
                                                                 std::size_t k) const {
  if (x.size() != outcomes()) throw ArgumentError("column length differs from outcome count");
  if (k >= n_times()) throw RangeError("time index outside finite space");
  const auto& ids = block_ids_[k];
  std::vector<double> mass(n_blocks_[k], 0.0), weighted(n_blocks_[k], 0.0);
  for (std::size_t w = 0; w < outcomes(); ++w) {
    mass[ids[w]] += probabilities_[w];
    weighted[ids[w]] += probabilities_[w] * x[w];
  }
  std::vector<double> out(outcomes());
  for (std::size_t w = 0; w < outcomes(); ++w) out[w] = weighted[ids[w]] / mass[ids[w]];
  return out;
}

double FiniteFilteredSpace::expectation(std::span<const double> x) const {
  if (x.size() != outcomes()) throw ArgumentError("column length differs from outcome count");
  double sum = 0.0;
  for (std::size_t w = 0; w < outcomes(); ++w) sum += probabilities_[w] * x[w];
  return sum;
}

double FiniteFilteredSpace::measurability_defect(std::span<const double> x,
                                                 std::size_t k) const {
  if (x.size() != outcomes()) throw ArgumentError("column length differs from outcome count");
  const auto& ids = block_ids_[k];
  std::vector<double> lo(n_blocks_[k], INFINITY), hi(n_blocks_[k], -INFINITY);
  for (std::size_t w = 0; w < outcomes(); ++w) {
    lo[ids[w]] = std::min(lo[ids[w]], x[w]);
    hi[ids[w]] = std::max(hi[ids[w]], x[w]);
  }
  double defect = 0.0;
  for (std::size_t b = 0; b < lo.size(); ++b) defect = std::max(defect, hi[b] - lo[b]);
  return defect;
}

nlohmann::ordered_json FiniteFilteredSpace::to_json() const {
  nlohmann::ordered_json doc;
  doc["probabilities"] = probabilities_;
  doc["times"] = times_;
  doc["block_ids"] = block_ids_;
  return doc;
}

FiniteFilteredSpace FiniteFilteredSpace::from_json(const nlohmann::json& doc) {
  return FiniteFilteredSpace(doc.at("probabilities").get<std::vector<double>>(),
                             doc.at("times").get<std::vector<double>>(),
                             doc.at("block_ids").get<std::vector<std::vector<std::size_t>>>());
}

FiniteProcess::FiniteProcess(std::vector<std::vector<double>> values)
    : values_(std::move(values)) {
  for (const auto& col : values_) {
    if (col.size() != values_.front().size()) {
      throw ArgumentError("finite process columns must have equal length");
    }
  }
}

FiniteProcess FiniteProcess::operator+(const FiniteProcess& other) const {
  FiniteProcess out = *this;
  for (std::size_t k = 0; k < n_times(); ++k)
    for (std::size_t w = 0; w < outcomes(); ++w) out.at(k, w) += other.at(k, w);
  return out;
}

FiniteProcess FiniteProcess::operator-(const FiniteProcess& other) const {
  FiniteProcess out = *this;
  for (std::size_t k = 0; k < n_times(); ++k)
    for (std::size_t w = 0; w < outcomes(); ++w) out.at(k, w) -= other.at(k, w);
  return out;
}

FiniteProcess FiniteProcess::operator*(double a) const {
  FiniteProcess out = *this;
  for (auto& col : out.values_)
    for (double& v : col) v *= a;
  return out;
}

double FiniteProcess::max_abs_difference(const FiniteProcess& other) const {
  if (other.n_times() != n_times() || other.outcomes() != outcomes()) {
    throw ArgumentError("finite processes have different shapes");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < n_times(); ++k)
    for (std::size_t w = 0; w < outcomes(); ++w)
      d = std::max(d, std::fabs(at(k, w) - other.at(k, w)));
  return d;
}

nlohmann::ordered_json FiniteProcess::to_json() const {
  nlohmann::ordered_json doc;
  doc["values"] = values_;
  return doc;
}

FiniteProcess FiniteProcess::from_json(const nlohmann::json& doc) {
  return FiniteProcess(doc.at("values").get<std::vector<std::vector<double>>>());
}

bool is_adapted(const FiniteFilteredSpace& space, const FiniteProcess& x, double tol) {
  if (x.n_times() != space.n_times() || x.outcomes() != space.outcomes()) {
    throw ArgumentError("process shape does not match the finite space");
  }
  for (std::size_t k = 0; k < x.n_times(); ++k) {
    if (space.measurability_defect(x.column(k), k) > tol * scale_of(x.column(k))) return false;
  }
  return true;
}

AdaptedFiniteProcess::AdaptedFiniteProcess(const FiniteFilteredSpace& space,
                                           FiniteProcess values, double tol)
    : values_(std::move(values)) {
  if (!is_adapted(space, values_, tol)) {
    throw AdaptednessError("process is not constant on the blocks of its filtration");
  }
}

FiniteStoppingTime::FiniteStoppingTime(const FiniteFilteredSpace& space,
                                       std::vector<std::optional<std::size_t>> index)
    : index_(std::move(index)) {
  if (index_.size() != space.outcomes()) {
    throw ArgumentError("stopping time needs one value per outcome");
  }
  for (const auto& v : index_) {
    if (v && *v >= space.n_times()) throw RangeError("stopping index outside time set");
  }
  for (std::size_t k = 0; k < space.n_times(); ++k) {
    std::vector<int> seen(space.n_blocks(k), -1);
    for (std::size_t w = 0; w < space.outcomes(); ++w) {
      const int stopped = (index_[w] && *index_[w] <= k) ? 1 : 0;
      int& s = seen[space.block(k, w)];
      if (s == -1) {
        s = stopped;
      } else if (s != stopped) {
        throw MeasurabilityError("{sigma <= t_" + std::to_string(k) +
                                 "} is not in the filtration at that time");
      }
    }
  }
}

FiniteStoppingTime FiniteStoppingTime::constant(const FiniteFilteredSpace& space,
                                                std::optional<std::size_t> index) {
  return FiniteStoppingTime(space, std::vector<std::optional<std::size_t>>(space.outcomes(), index));
}

FiniteStoppingTime FiniteStoppingTime::first_hit(const FiniteFilteredSpace& space,
                                                 const FiniteProcess& x, double level) {
  std::vector<std::optional<std::size_t>> index(space.outcomes());
  for (std::size_t w = 0; w < space.outcomes(); ++w) {
    for (std::size_t k = 0; k < x.n_times(); ++k) {
      if (std::fabs(x.at(k, w)) >= level) {
        index[w] = k;
        break;
      }
    }
  }
  return FiniteStoppingTime(space, std::move(index));
}

MartingaleVerdict is_martingale(const FiniteFilteredSpace& space, const FiniteProcess& m,
                                double tol) {
  if (!is_adapted(space, m)) throw AdaptednessError("is_martingale needs an adapted process");
  MartingaleVerdict v;
  for (std::size_t k = 0; k < m.n_times(); ++k) {
    for (std::size_t l = k + 1; l < m.n_times(); ++l) {
      const auto cond = space.conditional_expectation(m.column(l), k);
      for (std::size_t w = 0; w < m.outcomes(); ++w) {
        v.max_defect = std::max(v.max_defect, std::fabs(cond[w] - m.at(k, w)));
      }
    }
  }
  v.holds = v.max_defect <= tol;
  return v;
}

MartingaleVerdict check_increment_martingale(const FiniteFilteredSpace& space,
                                             const FiniteProcess& m, double tol) {
  if (m.n_times() != space.n_times() || m.outcomes() != space.outcomes()) {
    throw ArgumentError("process shape does not match the finite space");
  }
  MartingaleVerdict v;
  std::vector<double> inc(m.outcomes());
  for (std::size_t k = 0; k < m.n_times(); ++k) {
    for (std::size_t l = k + 1; l < m.n_times(); ++l) {
      for (std::size_t w = 0; w < m.outcomes(); ++w) inc[w] = m.at(l, w) - m.at(k, w);
      if (space.measurability_defect(inc, l) > 1e-12 * scale_of(inc)) {
        throw AdaptednessError("increment over time indices (" + std::to_string(k) + ", " +
                               std::to_string(l) + "] is not adapted");
      }
      const auto cond = space.conditional_expectation(inc, k);
      for (double c : cond) v.max_defect = std::max(v.max_defect, std::fabs(c));
    }
  }
  v.holds = v.max_defect <= tol;
  return v;
}

Decomposition decompose(const FiniteFilteredSpace& space, const FiniteProcess& m,
                        double tol) {
  const auto verdict = check_increment_martingale(space, m, tol);
  if (!verdict.holds) {
    throw ArgumentError("decompose needs an increment martingale (defect " +
                        std::to_string(verdict.max_defect) + ")");
  }
  FiniteProcess k_part(m.n_times(), m.outcomes());
  for (std::size_t k = 0; k < m.n_times(); ++k) {
    const auto cond = space.conditional_expectation(m.column(k), k);
    std::copy(cond.begin(), cond.end(), k_part.column(k).begin());
  }
  FiniteProcess n_part = m - k_part;
  return {std::move(k_part), std::move(n_part)};
}

FiniteProcess stop(const FiniteFilteredSpace& space, const FiniteProcess& x,
                   const FiniteStoppingTime& sigma) {
  if (sigma.outcomes() != space.outcomes() || x.outcomes() != space.outcomes()) {
    throw ArgumentError("stopping time and process must live on the same space");
  }
  FiniteProcess out = x;
  for (std::size_t w = 0; w < x.outcomes(); ++w) {
    if (!sigma[w]) continue;
    for (std::size_t k = *sigma[w] + 1; k < x.n_times(); ++k) out.at(k, w) = x.at(*sigma[w], w);
  }
  return out;
}

FiniteProcess increment_after(const FiniteFilteredSpace& space, const FiniteProcess& m,
                              const FiniteStoppingTime& tau) {
  return m - stop(space, m, tau);
}

std::vector<double> second_moments(const FiniteFilteredSpace& space, const FiniteProcess& x) {
  std::vector<double> out(x.n_times());
  std::vector<double> sq(x.outcomes());
  for (std::size_t k = 0; k < x.n_times(); ++k) {
    for (std::size_t w = 0; w < x.outcomes(); ++w) sq[w] = x.at(k, w) * x.at(k, w);
    out[k] = space.expectation(sq);
  }
  return out;
}

}  // namespace incmart
