#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "incmart/errors.hpp"
#include "incmart/exact.hpp"
#include "incmart/time_grid.hpp"

namespace incmart {

enum class Interpolation { cadlag_constant, linear_continuous };

template <class T>
struct Jump {
  std::size_t index;  // grid index i >= 1; the jump happens at times[i]
  T size;
};

/// Grid stopping time realised on one path: a grid index, or nullopt for +inf.
using GridStop = std::optional<std::size_t>;

/// Values of a cadlag path at grid times plus explicit jump records.
///
/// The scalar is a template parameter so the same kernels can run over
/// doubles (simulation) and over exact rationals (identity checks).
template <class T>
class BasicPath {
 public:
  BasicPath(GridPtr grid, std::vector<T> values,
            std::vector<Jump<T>> jumps = {},
            Interpolation interpolation = Interpolation::cadlag_constant)
      : grid_(std::move(grid)),
        values_(std::move(values)),
        jumps_(std::move(jumps)),
        interpolation_(interpolation) {
    if (!grid_) throw ArgumentError("SamplePath needs a grid");
    if (values_.size() != grid_->size()) {
      throw ArgumentError("SamplePath has " + std::to_string(values_.size()) +
                          " values for a grid of " +
                          std::to_string(grid_->size()) + " times");
    }
    std::sort(jumps_.begin(), jumps_.end(),
              [](const Jump<T>& a, const Jump<T>& b) { return a.index < b.index; });
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      if (jumps_[k].index < 1 || jumps_[k].index >= values_.size()) {
        throw ArgumentError("jump index " + std::to_string(jumps_[k].index) +
                            " outside [1, grid size)");
      }
      if (k > 0 && jumps_[k].index == jumps_[k - 1].index) {
        throw ArgumentError("two jump records at grid index " +
                            std::to_string(jumps_[k].index));
      }
    }
    if (interpolation_ == Interpolation::linear_continuous && !jumps_.empty()) {
      throw ArgumentError("a continuous (linear) path cannot carry jumps");
    }
  }

  const TimeGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const T> values() const { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  std::span<const Jump<T>> jumps() const { return jumps_; }
  Interpolation interpolation() const { return interpolation_; }
  bool continuous() const { return interpolation_ == Interpolation::linear_continuous; }

  const Jump<T>* find_jump(std::size_t i) const {
    const auto it = std::lower_bound(
        jumps_.begin(), jumps_.end(), i,
        [](const Jump<T>& j, std::size_t idx) { return j.index < idx; });
    return (it != jumps_.end() && it->index == i) ? &*it : nullptr;
  }

  T jump_at(std::size_t i) const {
    const Jump<T>* j = find_jump(i);
    return j ? j->size : T(0);
  }

  /// X_{t_i-} = X_{t_i} - Delta X_{t_i}.
  T left_limit(std::size_t i) const { return T(values_[i] - jump_at(i)); }

 private:
  GridPtr grid_;
  std::vector<T> values_;
  std::vector<Jump<T>> jumps_;
  Interpolation interpolation_;
};

using SamplePath = BasicPath<double>;
using ExactPath = BasicPath<Exact>;

inline ExactPath to_exact(const SamplePath& p) {
  std::vector<Exact> values(p.values().begin(), p.values().end());
  std::vector<Jump<Exact>> jumps;
  jumps.reserve(p.jumps().size());
  for (const auto& j : p.jumps()) jumps.push_back({j.index, Exact(j.size)});
  return ExactPath(p.grid_ptr(), std::move(values), std::move(jumps),
                   p.interpolation());
}

inline SamplePath to_double(const ExactPath& p) {
  std::vector<double> values;
  values.reserve(p.size());
  for (const auto& v : p.values()) values.push_back(v.get_d());
  std::vector<Jump<double>> jumps;
  for (const auto& j : p.jumps()) jumps.push_back({j.index, j.size.get_d()});
  return SamplePath(p.grid_ptr(), std::move(values), std::move(jumps),
                    p.interpolation());
}

/// Read-only view of a path restricted to grid indices [0, last]. Callbacks
/// that must not see the future (integrands, conditioning features) receive
/// this instead of the full path; reading past `last` throws.
class PathPrefix {
 public:
  PathPrefix(const SamplePath& path, std::size_t last) : path_(&path), last_(last) {
    if (last >= path.size()) throw RangeError("prefix end outside path");
  }

  std::size_t last_index() const { return last_; }
  double time() const { return path_->grid()[last_]; }
  double time_at(std::size_t i) const { check(i); return path_->grid()[i]; }
  double value(std::size_t i) const { check(i); return path_->values()[i]; }
  double current() const { return path_->values()[last_]; }
  double jump_at(std::size_t i) const { check(i); return path_->jump_at(i); }
  std::span<const double> values() const {
    return path_->values().first(last_ + 1);
  }

 private:
  void check(std::size_t i) const {
    if (i > last_) {
      throw ContractViolation("read at grid index " + std::to_string(i) +
                              " beyond the visible prefix ending at " +
                              std::to_string(last_));
    }
  }

  const SamplePath* path_;
  std::size_t last_;
};

}  // namespace incmart
