#pragma once

// Exact rational scalar used to check pathwise identities without rounding.
// Every finite double is a dyadic rational, so converting sampled values to
// Exact is lossless and sums/products of them stay exact.

#include <gmpxx.h>

#include <cmath>

namespace incmart {

using Exact = mpq_class;

inline double to_double(const Exact& x) { return x.get_d(); }
inline double to_double(double x) { return x; }

inline Exact abs_value(const Exact& x) { return abs(x); }
inline double abs_value(double x) { return std::fabs(x); }

}  // namespace incmart
