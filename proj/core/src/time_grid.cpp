#include "incmart/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "incmart/errors.hpp"

namespace incmart {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) {
    throw ArgumentError("TimeGrid needs at least two times");
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) {
      throw ArgumentError("TimeGrid times must be finite");
    }
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw ArgumentError("TimeGrid times must be strictly increasing (index " +
                          std::to_string(i) + ")");
    }
  }
}

TimeGrid TimeGrid::uniform(double t_min, double t_max, std::size_t n_cells) {
  if (n_cells < 1 || !(t_max > t_min)) {
    throw ArgumentError("uniform grid needs t_min < t_max and n_cells >= 1");
  }
  std::vector<double> times(n_cells + 1);
  const double width = (t_max - t_min) / static_cast<double>(n_cells);
  for (std::size_t i = 0; i <= n_cells; ++i) {
    times[i] = t_min + width * static_cast<double>(i);
  }
  times.back() = t_max;
  return TimeGrid(std::move(times));
}

TimeGrid TimeGrid::log_tail(double t_min, double t_max, std::size_t n_cells) {
  if (n_cells < 1 || !(t_max > t_min)) {
    throw ArgumentError("log-tail grid needs t_min < t_max and n_cells >= 1");
  }
  const double n = static_cast<double>(n_cells);
  const double w = (t_max - t_min) / n;
  const double base = std::log1p(n);
  std::vector<double> times(n_cells + 1);
  for (std::size_t k = 0; k <= n_cells; ++k) {
    const double d = w * std::expm1(base * static_cast<double>(k) / n);
    times[n_cells - k] = t_max - d;
  }
  times.front() = t_min;
  times.back() = t_max;
  return TimeGrid(std::move(times));
}

TimeGrid TimeGrid::make(double t_min, double t_max, std::size_t n_cells,
                        GridSpacing spacing) {
  return spacing == GridSpacing::uniform ? uniform(t_min, t_max, n_cells)
                                         : log_tail(t_min, t_max, n_cells);
}

double TimeGrid::width(std::size_t i) const {
  if (i == 0 || i >= times_.size()) {
    throw RangeError("cell index " + std::to_string(i) + " outside grid");
  }
  return times_[i] - times_[i - 1];
}

std::size_t TimeGrid::snap(double t) const {
  if (!(t >= t_min() && t <= t_max())) {
    throw RangeError("time " + std::to_string(t) + " outside grid span [" +
                     std::to_string(t_min()) + ", " + std::to_string(t_max()) +
                     "]");
  }
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  const auto hi = static_cast<std::size_t>(it - times_.begin());
  if (hi == 0) return 0;
  const std::size_t lo = hi - 1;
  return (t - times_[lo] <= times_[hi] - t) ? lo : hi;
}

std::size_t TimeGrid::index_at_or_before(double t) const {
  if (t < t_min()) {
    throw RangeError("time " + std::to_string(t) + " before grid start");
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

std::size_t TimeGrid::anchor_index() const {
  if (0.0 < t_min() || 0.0 > t_max()) return 0;
  return snap(0.0);
}

}  // namespace incmart
