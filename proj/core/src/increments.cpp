#include "incmart/increments.hpp"

#include <algorithm>
#include <cmath>

namespace incmart {

TailAnchor anchor_at_minus_infinity(const SamplePath& path, std::size_t tail_window,
                                    double tol) {
  if (tail_window < 2 || tail_window >= path.size()) {
    throw ArgumentError("tail window must be >= 2 and smaller than the grid");
  }
  const auto values = path.values().first(tail_window + 1);
  double sum = 0.0;
  for (double v : values) sum += v;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double oscillation = *hi - *lo;
  // A flat window returns its value exactly rather than a rounded mean.
  const double limit =
      (*hi == *lo) ? *lo : sum / static_cast<double>(values.size());

  std::vector<double> shifted(path.values().begin(), path.values().end());
  for (double& v : shifted) v -= limit;
  std::vector<Jump<double>> jumps(path.jumps().begin(), path.jumps().end());
  TailAnchor out{SamplePath(path.grid_ptr(), std::move(shifted), std::move(jumps),
                            path.interpolation()),
                 limit, oscillation, false};
  out.converged = std::isfinite(oscillation) && oscillation <= tol;
  return out;
}

}  // namespace incmart
