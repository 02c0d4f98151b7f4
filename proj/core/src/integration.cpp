#include "incmart/integration.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <regex>

#include "incmart/errors.hpp"

namespace incmart {

Integrand Integrand::deterministic(Deterministic f, std::string name) {
  Integrand i;
  i.f_ = std::move(f);
  i.name_ = std::move(name);
  return i;
}

Integrand Integrand::functional(Functional g, std::string name) {
  Integrand i;
  i.g_ = std::move(g);
  i.name_ = std::move(name);
  return i;
}

Integrand Integrand::parse(const std::string& text) {
  static const std::regex form(R"(\s*([a-z]+)\s*\(\s*([^,\s)]+)\s*(?:,\s*([^,\s)]+)\s*)?\)\s*)");
  std::smatch match;
  if (!std::regex_match(text, match, form)) {
    throw ConfigurationError("integrand: cannot parse '" + text +
                             "' (expected exp(rate), const(c), poly(k) or indicator(a,b))");
  }
  auto number = [&](const std::string& s) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      throw ConfigurationError("integrand: bad number '" + s + "' in '" + text + "'");
    }
    return v;
  };
  const std::string kind = match[1];
  const bool two = match[3].matched;
  const double p = number(match[2]);
  const std::string name = kind + "(" + std::string(match[2]) +
                           (two ? "," + std::string(match[3]) : "") + ")";
  if (kind == "exp" && !two) {
    return deterministic([p](double u) { return std::exp(p * u); }, name);
  }
  if (kind == "const" && !two) return deterministic([p](double) { return p; }, name);
  if (kind == "poly" && !two) {
    if (p != std::floor(p) || p < 0) throw ConfigurationError("integrand: poly needs k >= 0 integer");
    const int k = static_cast<int>(p);
    return deterministic([k](double u) { return std::pow(u, k); }, name);
  }
  if (kind == "indicator" && two) {
    const double q = number(match[3]);
    if (!(p < q)) throw ConfigurationError("integrand: indicator needs a < b");
    return deterministic([p, q](double u) { return (u >= p && u < q) ? 1.0 : 0.0; }, name);
  }
  throw ConfigurationError("integrand: unknown form '" + text + "'");
}

double Integrand::operator()(double t) const {
  if (!f_) throw ArgumentError("integrand '" + name_ + "' needs the path");
  return f_(t);
}

std::vector<double> Integrand::left_values(const SamplePath& m) const {
  if (f_) return left_values(m.grid());
  std::vector<double> phi(m.size(), 0.0);
  for (std::size_t i = 1; i < m.size(); ++i) {
    const PathPrefix prefix(m, i - 1);
    phi[i] = g_(prefix, prefix.time());
  }
  return phi;
}

std::vector<double> Integrand::left_values(const TimeGrid& grid) const {
  if (!f_) throw ArgumentError("integrand '" + name_ + "' needs the path");
  std::vector<double> phi(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) phi[i] = f_(grid[i - 1]);
  return phi;
}

SamplePath increment_integral(const Integrand& phi, const SamplePath& m, std::size_t s) {
  return integral_kernel(phi.left_values(m), m, s);
}

SamplePath increment_integral(const Integrand& phi, const SamplePath& m, double s) {
  return increment_integral(phi, m, m.grid().snap(s));
}

std::string to_string(IntegrandClass c) {
  switch (c) {
    case IntegrandClass::LL1: return "LL1";
    case IntegrandClass::ILL1_only: return "ILL1_only";
    case IntegrandClass::neither: return "neither";
  }
  return "?";
}

namespace {

ClassVerdict classify(const std::vector<double>& phi, const QVReport& qv) {
  ClassVerdict out;
  const std::size_t n = qv.qv.size();
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    if (!std::isfinite(phi[i])) {
      out.verdict = IntegrandClass::neither;
      out.diagnostic = "integrand is not finite on cell " + std::to_string(i);
      return out;
    }
    cumulative[i] = cumulative[i - 1] + phi[i] * phi[i] * (qv.qv[i] - qv.qv[i - 1]);
    if (!std::isfinite(cumulative[i])) {
      out.verdict = IntegrandClass::neither;
      out.diagnostic = "integral of phi^2 d[M] overflows on cell " + std::to_string(i);
      return out;
    }
  }
  out.tail = tail_verdict(cumulative);
  out.verdict = out.tail == TailVerdict::converges ? IntegrandClass::LL1 : IntegrandClass::ILL1_only;
  if (out.tail == TailVerdict::inconclusive) out.diagnostic = "too few grid points to judge the tail";
  return out;
}

}  // namespace

ClassVerdict ll1_classify(const Integrand& phi, const QVReport& qv) {
  return classify(phi.left_values(qv.qv.grid()), qv);
}

ClassVerdict ll1_classify(const Integrand& phi, const QVReport& qv, const SamplePath& m) {
  if (!same_grid(qv.qv.grid_ptr(), m.grid_ptr())) {
    throw GridMismatchError("QV report and path live on different grids");
  }
  return classify(phi.left_values(m), qv);
}

IntegralReport improper_integral(const Integrand& phi, const SamplePath& m,
                                 std::size_t tail_window) {
  const std::vector<double> w = phi.left_values(m);
  SamplePath raw = integral_kernel(w, m, 0);
  const QVReport qv = realized_qv(m, std::size_t{0});
  IntegralReport r{raw, classify(w, qv).verdict, std::nullopt, false, 0.0, 0.0, true};
  const TailStats stats = tail_stats(raw.values());
  if (tail_window == 0) tail_window = tail_window_size(raw.size()) - 1;
  tail_window = std::min(tail_window, raw.size() - 1);
  if (stats.finite && tail_window >= 2) {
    const TailAnchor anchored =
        anchor_at_minus_infinity(raw, tail_window, kTailRelTolerance * (1.0 + stats.range));
    r.converged = anchored.converged;
    r.limit = anchored.limit;
    r.oscillation = anchored.oscillation;
    if (r.converged) {
      r.integral = anchored.path;
      r.improper_value = anchored.path[anchored.path.size() - 1];
    }
  }
  r.consistent = !(r.verdict == IntegrandClass::LL1 && !r.converged);
  return r;
}

namespace {

Exact path_defect(const ExactPath& a, const ExactPath& b) {
  Exact worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max<Exact>(worst, abs(Exact(a[i] - b[i])));
  return worst;
}

std::vector<Exact> exact_weights(const Integrand& phi, const SamplePath& m) {
  const std::vector<double> w = phi.left_values(m);
  return std::vector<Exact>(w.begin(), w.end());
}

}  // namespace

PropertyReport verify_integral_properties(const Integrand& phi, const Integrand& psi,
                                          const SamplePath& m_double, GridStop sigma,
                                          std::size_t s, double a_double, double b_double) {
  if (s >= m_double.size()) throw RangeError("property check start outside grid");
  const ExactPath m = to_exact(m_double);
  const std::vector<Exact> f = exact_weights(phi, m_double);
  const std::vector<Exact> g = exact_weights(psi, m_double);
  const Exact a(a_double), b(b_double);
  const ExactPath fm = integral_kernel(f, m, 0);
  PropertyReport r;

  // (1) increment structure
  r.increment_structure = path_defect(increment(fm, s), integral_kernel(f, increment(m, s), 0)).get_d();

  // (3) linearity
  std::vector<Exact> combo(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) combo[i] = a * f[i] + b * g[i];
  const ExactPath gm = integral_kernel(g, m, 0);
  std::vector<Exact> sum(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) sum[i] = a * fm[i] + b * gm[i];
  r.linearity = path_defect(integral_kernel(combo, m, 0), ExactPath(m.grid_ptr(), sum)).get_d();

  // (4) jump formula at every recorded jump, and the QV formula
  Exact worst_jump = 0;
  for (const auto& j : m.jumps()) {
    worst_jump = std::max<Exact>(worst_jump, abs(Exact(fm.jump_at(j.index) - f[j.index] * j.size)));
    ++r.jumps_checked;
  }
  r.jump_formula = worst_jump.get_d();
  const ExactPath qv_fm = qv_path(fm, s);
  const ExactPath qv_m = qv_path(m, s);
  std::vector<Exact> weighted(m.size(), Exact(0));
  for (std::size_t i = s + 1; i < m.size(); ++i) {
    weighted[i] = weighted[i - 1] + f[i] * f[i] * (qv_m[i] - qv_m[i - 1]);
  }
  r.qv_formula = path_defect(qv_fm, ExactPath(m.grid_ptr(), weighted)).get_d();

  // (5) stopping
  const ExactPath stopped_integral = stop(fm, sigma);
  const ExactPath stopped_integrand = integral_kernel(stopped_weights(f, sigma), m, 0);
  const ExactPath stopped_integrator = integral_kernel(f, stop(m, sigma), 0);
  r.stopping = std::max<Exact>(path_defect(stopped_integral, stopped_integrand),
                               path_defect(stopped_integral, stopped_integrator))
                   .get_d();

  // (6) associativity
  std::vector<Exact> product(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) product[i] = g[i] * f[i];
  r.associativity = path_defect(integral_kernel(g, fm, 0), integral_kernel(product, m, 0)).get_d();

  r.passed = r.increment_structure == 0.0 && r.linearity == 0.0 && r.jump_formula == 0.0 &&
             r.qv_formula == 0.0 && r.stopping == 0.0 && r.associativity == 0.0;
  return r;
}

nlohmann::ordered_json to_json(const PropertyReport& r) {
  nlohmann::ordered_json doc;
  doc["increment_structure"] = r.increment_structure;
  doc["linearity"] = r.linearity;
  doc["jump_formula"] = r.jump_formula;
  doc["qv_formula"] = r.qv_formula;
  doc["stopping"] = r.stopping;
  doc["associativity"] = r.associativity;
  doc["jumps_checked"] = r.jumps_checked;
  doc["passed"] = r.passed;
  return doc;
}

SamplePath time_change_by_vol(const SamplePath& x, const std::function<double(double)>& sigma,
                              std::size_t s) {
  if (!x.continuous()) throw ArgumentError("time change needs a continuous path");
  std::vector<double> vol(x.size(), 1.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    vol[i] = sigma(x.grid()[i - 1]);
    if (!(vol[i] > 0.0) || !std::isfinite(vol[i])) {
      throw ArgumentError("volatility must be positive and finite on the grid");
    }
  }
  return inverse_vol_kernel(x, vol, s);
}

SamplePath time_change_to_bm(const SamplePath& x,
                             const std::function<double(double)>& sigma_sq_density,
                             std::size_t s) {
  return time_change_by_vol(
      x,
      [&sigma_sq_density](double t) {
        const double d = sigma_sq_density(t);
        if (!(d > 0.0)) throw ArgumentError("sigma^2 density must be positive on the grid");
        return std::sqrt(d);
      },
      s);
}

}  // namespace incmart
