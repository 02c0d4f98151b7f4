#pragma once

// Increment stochastic integrals on a grid. Cell (t_{i-1}, t_i] is weighted by
// the integrand at its left end, the discrete stand-in for predictability.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "incmart/increments.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/sample_path.hpp"

namespace incmart {

class Integrand {
 public:
  using Deterministic = std::function<double(double)>;
  // Receives the path up to and including t_{i-1}, and t_{i-1} itself.
  using Functional = std::function<double(const PathPrefix&, double)>;

  static Integrand deterministic(Deterministic f, std::string name = "custom");
  static Integrand functional(Functional g, std::string name = "functional");

  /// `exp(rate)`, `const(c)`, `poly(k)` (u^k) or `indicator(a,b)` (1 on [a, b)).
  static Integrand parse(const std::string& text);

  bool is_deterministic() const { return static_cast<bool>(f_); }
  const std::string& name() const { return name_; }

  /// Deterministic integrands only.
  double operator()(double t) const;

  /// phi[i] for i >= 1 is the weight of cell i; phi[0] is unused (0).
  std::vector<double> left_values(const SamplePath& m) const;
  /// Deterministic integrands only.
  std::vector<double> left_values(const TimeGrid& grid) const;

 private:
  Deterministic f_;
  Functional g_;
  std::string name_;
};

/// Weights multiplied by 1{t_{i-1} < sigma}: the integrand phi 1_(-inf, sigma].
template <class T>
std::vector<T> stopped_weights(std::vector<T> phi, GridStop sigma) {
  if (!sigma) return phi;
  for (std::size_t i = *sigma + 1; i < phi.size(); ++i) phi[i] = T(0);
  return phi;
}

/// phi (in) M: 0 up to index s, then the left-point sum over later cells.
/// Jumps are phi_i * Delta M_i.
template <class T>
BasicPath<T> integral_kernel(const std::vector<T>& phi, const BasicPath<T>& m, std::size_t s) {
  if (phi.size() != m.size()) throw ArgumentError("integrand weights do not match the grid");
  if (s >= m.size()) throw RangeError("integral start outside grid");
  std::vector<T> values(m.size(), T(0));
  for (std::size_t i = s + 1; i < m.size(); ++i) {
    values[i] = values[i - 1] + phi[i] * (m[i] - m[i - 1]);
  }
  std::vector<Jump<T>> jumps;
  for (const auto& j : m.jumps()) {
    if (j.index > s) jumps.push_back({j.index, T(phi[j.index] * j.size)});
  }
  return BasicPath<T>(m.grid_ptr(), std::move(values), std::move(jumps), m.interpolation());
}

SamplePath increment_integral(const Integrand& phi, const SamplePath& m, std::size_t s);
SamplePath increment_integral(const Integrand& phi, const SamplePath& m, double s);

enum class IntegrandClass { LL1, ILL1_only, neither };
std::string to_string(IntegrandClass c);

struct ClassVerdict {
  IntegrandClass verdict = IntegrandClass::neither;
  TailVerdict tail = TailVerdict::inconclusive;
  std::string diagnostic;
};

/// Tail of the cumulative integral of phi^2 against [M]^g decides LL1.
ClassVerdict ll1_classify(const Integrand& phi, const QVReport& qv);
/// Variant for path-functional integrands, which need M itself.
ClassVerdict ll1_classify(const Integrand& phi, const QVReport& qv, const SamplePath& m);

struct IntegralReport {
  SamplePath integral;  // normalised to 0 at -inf when converged
  IntegrandClass verdict = IntegrandClass::neither;
  std::optional<double> improper_value;  // integral over (-inf, t_max]
  bool converged = false;
  double limit = 0.0;
  double oscillation = 0.0;
  // LL1 should imply convergence; the grid-level diagnostics can disagree.
  bool consistent = true;
};

/// phi (in) M from t_min, re-anchored at the estimated value at -inf.
/// tail_window counts the earliest cells inspected; 0 picks the same window
/// as the tail-stabilization criterion.
IntegralReport improper_integral(const Integrand& phi, const SamplePath& m,
                                 std::size_t tail_window = 0);

struct PropertyReport {
  double increment_structure = 0.0;  // s(phi . M) vs phi . (sM)
  double linearity = 0.0;            // (a phi + b psi) . M vs a phi.M + b psi.M
  double jump_formula = 0.0;         // Delta(phi . M) vs phi Delta M at recorded jumps
  double qv_formula = 0.0;           // [phi . M] vs sum phi^2 d[M]
  double stopping = 0.0;             // three stopped forms agree
  double associativity = 0.0;        // psi . (phi . M) vs (psi phi) . M
  std::size_t jumps_checked = 0;
  bool passed = false;
};

/// Evaluates both sides of each identity in exact arithmetic.
PropertyReport verify_integral_properties(const Integrand& phi, const Integrand& psi,
                                          const SamplePath& m, GridStop sigma, std::size_t s,
                                          double a = 2.0, double b = -3.0);

nlohmann::ordered_json to_json(const PropertyReport& r);

/// B = (1 / sigma) (in) X started at s with sigma^2 given as a density.
SamplePath time_change_to_bm(const SamplePath& x,
                             const std::function<double(double)>& sigma_sq_density,
                             std::size_t s = 0);

/// Same with the volatility sigma itself.
SamplePath time_change_by_vol(const SamplePath& x, const std::function<double(double)>& sigma,
                              std::size_t s = 0);

/// Exact form: cell i of the result is (1 / sigma_i) Delta X_i.
template <class T>
BasicPath<T> inverse_vol_kernel(const BasicPath<T>& x, const std::vector<T>& sigma,
                                std::size_t s) {
  std::vector<T> inv(sigma.size(), T(0));
  for (std::size_t i = 1; i < sigma.size(); ++i) inv[i] = T(1) / sigma[i];
  return integral_kernel(inv, x, s);
}

}  // namespace incmart
