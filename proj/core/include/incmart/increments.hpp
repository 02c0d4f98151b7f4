#pragma once

// Increment operator, consistent increment families and the associated
// process. All kernels are templates over the scalar type; see exact.hpp.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "incmart/errors.hpp"
#include "incmart/sample_path.hpp"

namespace incmart {

/// The increment sX_t = X_t - X_{t ^ s}: zero up to grid index s, X_t - X_s after.
/// Jumps at indices <= s are dropped.
template <class T>
BasicPath<T> increment(const BasicPath<T>& path, std::size_t s) {
  if (s >= path.size()) throw RangeError("increment anchor outside grid");
  std::vector<T> values(path.size(), T(0));
  const T base = path[s];
  for (std::size_t i = s + 1; i < path.size(); ++i) values[i] = path[i] - base;
  std::vector<Jump<T>> jumps;
  for (const auto& j : path.jumps()) {
    if (j.index > s) jumps.push_back(j);
  }
  return BasicPath<T>(path.grid_ptr(), std::move(values), std::move(jumps),
                      path.interpolation());
}

/// Snaps s to the nearest grid time; RangeError outside the span.
template <class T>
BasicPath<T> increment(const BasicPath<T>& path, double s) {
  return increment(path, path.grid().snap(s));
}

template <class T>
T increment_over(const BasicPath<T>& path, std::size_t s, std::size_t t) {
  if (s > t) {
    throw ArgumentError("increment_over needs s <= t (got indices " +
                        std::to_string(s) + " > " + std::to_string(t) + ")");
  }
  if (t >= path.size()) throw RangeError("increment_over index outside grid");
  if (s == t) return T(0);
  return T(path[t] - path[s]);
}

template <class T>
T increment_over(const BasicPath<T>& path, double s, double t) {
  if (s > t) throw ArgumentError("increment_over needs s <= t");
  return increment_over(path, path.grid().snap(s), path.grid().snap(t));
}

/// delta_i = X_{t_i} - X_{t_{i-1}} for i = 1..n-1 (stored at i-1).
template <class T>
std::vector<T> cell_increments(const BasicPath<T>& path) {
  std::vector<T> cells(path.size() - 1);
  for (std::size_t i = 1; i < path.size(); ++i) cells[i - 1] = path[i] - path[i - 1];
  return cells;
}

/// X^sigma: values frozen from the stopping index on.
template <class T>
BasicPath<T> stop(const BasicPath<T>& path, GridStop sigma) {
  if (!sigma || *sigma >= path.size() - 1) return path;
  std::vector<T> values(path.values().begin(), path.values().end());
  for (std::size_t i = *sigma + 1; i < values.size(); ++i) values[i] = path[*sigma];
  std::vector<Jump<T>> jumps;
  for (const auto& j : path.jumps()) {
    if (j.index <= *sigma) jumps.push_back(j);
  }
  return BasicPath<T>(path.grid_ptr(), std::move(values), std::move(jumps),
                      path.interpolation());
}

/// Cell storage for a consistent family {sI}: the increment over every grid
/// cell, so sI_t + tI_u = sI_u holds by construction.
template <class T>
class IncrementFamily {
 public:
  IncrementFamily(GridPtr grid, std::vector<T> cells, std::vector<Jump<T>> jumps = {},
                  Interpolation interpolation = Interpolation::cadlag_constant)
      : grid_(std::move(grid)),
        cells_(std::move(cells)),
        jumps_(std::move(jumps)),
        interpolation_(interpolation) {
    if (!grid_) throw ArgumentError("IncrementFamily needs a grid");
    if (cells_.size() + 1 != grid_->size()) {
      throw ArgumentError("IncrementFamily needs one increment per grid cell");
    }
  }

  const GridPtr& grid_ptr() const { return grid_; }
  const TimeGrid& grid() const { return *grid_; }
  std::span<const T> cells() const { return cells_; }
  std::span<const Jump<T>> jumps() const { return jumps_; }
  Interpolation interpolation() const { return interpolation_; }

  /// The member sI of the family as a path (zero up to index s).
  BasicPath<T> member(std::size_t s) const {
    if (s >= grid_->size()) throw RangeError("family member index outside grid");
    std::vector<T> values(grid_->size(), T(0));
    for (std::size_t i = s + 1; i < values.size(); ++i) {
      values[i] = values[i - 1] + cells_[i - 1];
    }
    std::vector<Jump<T>> jumps;
    for (const auto& j : jumps_) {
      if (j.index > s) jumps.push_back(j);
    }
    return BasicPath<T>(grid_, std::move(values), std::move(jumps), interpolation_);
  }

 private:
  GridPtr grid_;
  std::vector<T> cells_;
  std::vector<Jump<T>> jumps_;
  Interpolation interpolation_;
};

template <class T>
IncrementFamily<T> increments_of(const BasicPath<T>& path) {
  return IncrementFamily<T>(path.grid_ptr(), cell_increments(path),
                            std::vector<Jump<T>>(path.jumps().begin(), path.jumps().end()),
                            path.interpolation());
}

/// A path whose increments reproduce the family, normalised to 0 at the grid
/// time nearest 0 (TimeGrid::anchor_index).
template <class T>
BasicPath<T> associate(const IncrementFamily<T>& family) {
  const std::size_t n = family.grid().size();
  const std::size_t anchor = family.grid().anchor_index();
  const auto cells = family.cells();
  std::vector<T> values(n, T(0));
  for (std::size_t i = anchor + 1; i < n; ++i) values[i] = values[i - 1] + cells[i - 1];
  for (std::size_t i = anchor; i > 0; --i) values[i - 1] = values[i] - cells[i - 1];
  return BasicPath<T>(family.grid_ptr(), std::move(values),
                      std::vector<Jump<T>>(family.jumps().begin(), family.jumps().end()),
                      family.interpolation());
}

struct ConsistencyReport {
  double max_defect = 0.0;        // max |sI_t + tI_u - sI_u| over probes
  double max_start_defect = 0.0;  // max |sI_t| over t <= s
  std::size_t probes = 0;
  bool passed = true;
};

using TimeTriple = std::array<double, 3>;

/// Checks the consistency conditions of a family given as s -> sI on `grid`.
template <class T>
ConsistencyReport check_consistency(const std::function<BasicPath<T>(double)>& family,
                                    const GridPtr& grid,
                                    const std::vector<TimeTriple>& probes, double tol) {
  std::map<std::size_t, BasicPath<T>> cache;
  auto member = [&](std::size_t idx) -> const BasicPath<T>& {
    auto it = cache.find(idx);
    if (it == cache.end()) {
      BasicPath<T> p = family((*grid)[idx]);
      if (!same_grid(p.grid_ptr(), grid)) {
        throw GridMismatchError("family member for s = " + std::to_string((*grid)[idx]) +
                                " lives on a different grid");
      }
      it = cache.emplace(idx, std::move(p)).first;
    }
    return it->second;
  };

  ConsistencyReport report;
  for (const auto& probe : probes) {
    if (!(probe[0] <= probe[1] && probe[1] <= probe[2])) {
      throw ArgumentError("consistency probe needs s <= t <= u");
    }
    const std::size_t s = grid->snap(probe[0]);
    const std::size_t t = grid->snap(probe[1]);
    const std::size_t u = grid->snap(probe[2]);
    const BasicPath<T>& sI = member(s);
    const BasicPath<T>& tI = member(t);
    const T defect = sI[t] + tI[u] - sI[u];
    report.max_defect = std::max(report.max_defect, to_double(abs_value(T(defect))));
    for (std::size_t i = 0; i <= s; ++i) {
      report.max_start_defect = std::max(report.max_start_defect, to_double(abs_value(sI[i])));
    }
    ++report.probes;
  }
  report.passed = report.max_defect <= tol && report.max_start_defect <= tol;
  return report;
}

struct TailAnchor {
  SamplePath path;       // input minus the limit estimate
  double limit = 0.0;    // mean over the tail window
  double oscillation = 0.0;
  bool converged = false;
};

inline constexpr double kDefaultTailTolerance = 1e-3;

/// Estimates X_{-inf} from the earliest `tail_window` cells (grid indices
/// 0..tail_window) and re-anchors the path there. Convergence is a
/// diagnostic: max - min over the window <= tol.
TailAnchor anchor_at_minus_infinity(const SamplePath& path, std::size_t tail_window,
                                    double tol = kDefaultTailTolerance);

}  // namespace incmart
