#include "incmart/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace incmart::cli {

namespace {

constexpr double kWidth = 720, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" +
         num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

std::string axes(const Frame& f, const std::string& x_label, const std::string& y_label) {
  std::string s;
  s += "<g stroke=\"#444\" fill=\"none\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) +
       "\" width=\"" + num(kWidth - kLeft - kRight) + "\" height=\"" +
       num(kHeight - kTop - kBottom) + "\"/></g>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * k / 4.0;
    s += "<text x=\"" + num(f.px(x)) + "\" y=\"" + num(kHeight - kBottom + 16) +
         "\" text-anchor=\"middle\">" + num(x) + "</text>\n";
    s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(y) + 4) +
         "\" text-anchor=\"end\">" + num(y) + "</text>\n";
  }
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 10) +
       "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
  s += "<text transform=\"translate(16," + num(kHeight / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return s;
}

}  // namespace

std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::string out = header(title) + axes(f, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    // Thin long series to at most ~1000 vertices.
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 1000);
    out += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" + std::string(kColors[k % 10]) +
           "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      if (!std::isfinite(s.y[i])) continue;
      out += num(f.px(s.x[i])) + "," + num(f.py(s.y[i])) + " ";
    }
    out += "\"/>\n";
    if (!s.label.empty() && series.size() <= 10) {
      out += "<text x=\"" + num(kWidth - kRight - 4) + "\" y=\"" + num(kTop + 14 + 14.0 * k) +
             "\" text-anchor=\"end\" fill=\"" + kColors[k % 10] + "\">" + escape(s.label) +
             "</text>\n";
    }
  }
  return out + "</svg>\n";
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::vector<double>& guides) {
  double y0 = 0, y1 = 0;
  for (double v : values) {
    if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  for (double g : guides) y0 = std::min(y0, g), y1 = std::max(y1, g);
  widen(y0, y1);
  const double n = std::max<double>(1, values.size());
  const Frame f{0, n, y0, y1};
  std::string out = header(title) + axes(f, "", "");
  const double w = (kWidth - kLeft - kRight) / n;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? values[i] : 0.0;
    const double top = f.py(std::max(v, 0.0)), bottom = f.py(std::min(v, 0.0));
    out += "<rect x=\"" + num(f.px(i) + 0.1 * w) + "\" y=\"" + num(top) + "\" width=\"" +
           num(0.8 * w) + "\" height=\"" + num(bottom - top) + "\" fill=\"#1f77b4\"/>\n";
    if (i < labels.size()) {
      out += "<text x=\"" + num(f.px(i + 0.5)) + "\" y=\"" + num(kHeight - kBottom + 30) +
             "\" text-anchor=\"middle\" font-size=\"10\">" + escape(labels[i]) + "</text>\n";
    }
  }
  for (double g : guides) {
    out += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kWidth - kRight) + "\" y1=\"" +
           num(f.py(g)) + "\" y2=\"" + num(f.py(g)) +
           "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  }
  return out + "</svg>\n";
}

}  // namespace incmart::cli
