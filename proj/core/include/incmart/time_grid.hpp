#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace incmart {

enum class GridSpacing { uniform, log_tail };

/// Strictly increasing sampling times; the finite stand-in for the real line.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double t_min, double t_max, std::size_t n_cells);

  /// Cells grow geometrically toward t_min: distances from t_max are
  /// d_k = w * ((1 + n)^(k/n) - 1) with w = (t_max - t_min) / n. The finest
  /// cells sit next to t_max, the coarsest (about w * log(1 + n)) at t_min.
  static TimeGrid log_tail(double t_min, double t_max, std::size_t n_cells);

  static TimeGrid make(double t_min, double t_max, std::size_t n_cells,
                       GridSpacing spacing);

  std::size_t size() const { return times_.size(); }
  std::size_t cells() const { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  double t_min() const { return times_.front(); }
  double t_max() const { return times_.back(); }
  std::span<const double> times() const { return times_; }

  /// Width of the cell (t_{i-1}, t_i]; i in [1, size()).
  double width(std::size_t i) const;

  /// Index of the grid time nearest to t (ties go to the earlier time).
  /// Throws RangeError when t lies outside [t_min, t_max].
  std::size_t snap(double t) const;

  /// Largest index with times[i] <= t; RangeError if t < t_min.
  std::size_t index_at_or_before(double t) const;

  /// Grid time nearest 0, or index 0 when 0 is not spanned.
  std::size_t anchor_index() const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  std::vector<double> times_;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

inline GridPtr make_grid(TimeGrid grid) {
  return std::make_shared<const TimeGrid>(std::move(grid));
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
  return a == b || (a && b && *a == *b);
}

}  // namespace incmart
