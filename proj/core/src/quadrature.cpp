#include "incmart/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "incmart/errors.hpp"

namespace incmart {

namespace {

struct Simpson {
  const std::function<double(double)>& f;

  double recurse(double a, double b, double fa, double fm, double fb, double whole,
                 double tol, int depth) const {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol || !(m > a && b > m)) {
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }
};

// Beyond this v, e^v overflows; integrands that still matter there diverge.
constexpr double kMaxLogArgument = 700.0;

double lower_tail(const std::function<double(double)>& f, double c_log, double v_max,
                  double tol) {
  if (!(v_max > c_log)) return 0.0;
  auto g = [&f](double v) {
    const double ev = std::exp(v);
    return f(-ev) * ev;
  };
  // Split at integer v so the adaptive rule sees each decade of u separately.
  double total = 0.0;
  const double first = std::min(v_max, std::floor(c_log) + 1.0);
  const int pieces = static_cast<int>(std::ceil(v_max - first)) + 1;
  const double piece_tol = tol / pieces;
  total += adaptive_simpson(g, c_log, first, piece_tol);
  for (double v = first; v < v_max; v += 1.0) {
    total += adaptive_simpson(g, v, std::min(v + 1.0, v_max), piece_tol);
  }
  return total;
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  if (a > b) return -adaptive_simpson(f, b, a, tol, max_depth);
  if (!(tol > 0.0)) throw ArgumentError("quadrature tolerance must be positive");
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Simpson{f}.recurse(a, b, fa, fm, fb, whole, tol, max_depth);
}

double integrate_from_minus_infinity(const std::function<double(double)>& f, double t,
                                     double tol) {
  const double c = std::min(t, -1.0);
  double total = lower_tail(f, std::log(-c), kMaxLogArgument, 0.5 * tol);
  if (t > c) total += adaptive_simpson(f, c, t, 0.5 * tol);
  return total;
}

double integrate_long_range(const std::function<double(double)>& f, double a, double b,
                            double tol) {
  if (a > b) return -integrate_long_range(f, b, a, tol);
  if (a >= -1.0 || b <= a) return adaptive_simpson(f, a, b, tol);
  const double c = std::min(b, -1.0);
  double total = lower_tail(f, std::log(-c), std::log(-a), 0.5 * tol);
  if (b > c) total += adaptive_simpson(f, c, b, 0.5 * tol);
  return total;
}

}  // namespace incmart
