#pragma once

#include <functional>

namespace incmart {

/// Adaptive Simpson with Richardson correction; absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

/// Integral of f over (-inf, t]. The part below min(t, -1) is mapped to a
/// finite v-range through u = -e^v and cut where e^v overflows.
double integrate_from_minus_infinity(const std::function<double(double)>& f, double t,
                                     double tol);

/// Integral over [a, b] (a may be far below -1) using the same substitution on
/// the part of [a, b] below -1. Meant for slowly decaying integrands on long
/// negative ranges.
double integrate_long_range(const std::function<double(double)>& f, double a, double b,
                            double tol);

}  // namespace incmart
