#pragma once

// Minimal deterministic SVG charts: identical input gives identical text.

#include <string>
#include <vector>

namespace incmart::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label);

/// Bars with optional horizontal guide lines (e.g. +-4 for z-scores).
std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::vector<double>& guides = {});

}  // namespace incmart::cli
