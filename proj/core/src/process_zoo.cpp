#include "incmart/process_zoo.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "incmart/errors.hpp"
#include "incmart/quadrature.hpp"
#include "incmart/rng.hpp"

namespace incmart {

namespace {

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- hazard laws ---------------------------------------------------------

double heavy_c(const HazardLaw& law) { return law.p * (1.0 + std::numbers::ln2); }

double heavy_left_density(double c, double x) {
  const double l = std::log1p(x);
  const double d = 1.0 + x * l;
  return c * (l + x / (1.0 + x)) / (d * d);
}

// Rate of the exponential continuation on s > -1.
double heavy_beta(const HazardLaw& law) {
  return heavy_left_density(heavy_c(law), 1.0) / (1.0 - law.p);
}

double support_start(const HazardLaw& law) {
  return law.kind == HazardKind::exponential_tail ? law.location : -kInf;
}

// Points where the integrands below are not smooth.
std::vector<double> kinks(const HazardLaw& law) {
  switch (law.kind) {
    case HazardKind::exponential_tail: return {law.location};
    case HazardKind::heavy_tail: return {-1.0};
    default: return {};
  }
}

double piecewise_integral(const HazardLaw& law, const std::function<double(double)>& f,
                          double a, double b, double tol) {
  if (a == b) return 0.0;
  if (a > b) return -piecewise_integral(law, f, b, a, tol);
  const double lo = std::max(a, support_start(law));
  if (lo >= b) return 0.0;
  std::vector<double> cuts{lo};
  for (double k : kinks(law)) {
    if (k > lo && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  double total = 0.0;
  const double piece_tol = tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    if (cuts[i] <= -1.0 && cuts[i - 1] < -2.0) {
      total += integrate_long_range(f, cuts[i - 1], cuts[i], piece_tol);
    } else {
      total += adaptive_simpson(f, cuts[i - 1], cuts[i], piece_tol);
    }
  }
  return total;
}

// ---- parsing helpers -----------------------------------------------------

struct ParamReader {
  const std::map<std::string, std::string>& params;
  std::vector<std::string>& errors;
  std::set<std::string> used;

  std::optional<std::string> raw(const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  }

  void real(const std::string& key, double& out) {
    auto text = raw(key);
    if (!text) return;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text->c_str(), &end);
    if (end == text->c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      errors.push_back("model." + key + ": expected a finite number, got '" + *text + "'");
      return;
    }
    out = v;
  }

  void count(const std::string& key, std::size_t& out) {
    auto text = raw(key);
    if (!text) return;
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(text->c_str(), &end, 10);
    if (end == text->c_str() || *end != '\0' || errno == ERANGE) {
      errors.push_back("model." + key + ": expected an integer, got '" + *text + "'");
      return;
    }
    if (v < 0) {
      errors.push_back("model." + key + ": must be >= 0, got " + *text);
      return;
    }
    out = static_cast<std::size_t>(v);
  }

  template <class E>
  void choice(const std::string& key, E& out,
              const std::vector<std::pair<std::string, E>>& options) {
    auto text = raw(key);
    if (!text) return;
    std::string valid;
    for (const auto& [name, value] : options) {
      if (name == *text) {
        out = value;
        return;
      }
      valid += (valid.empty() ? "" : ", ") + name;
    }
    errors.push_back("model." + key + ": unknown value '" + *text + "' (valid: " + valid + ")");
  }

  void text(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  void finish() {
    for (const auto& [key, value] : params) {
      if (!used.count(key)) errors.push_back("model." + key + ": unknown parameter");
    }
  }
};

const std::vector<std::pair<std::string, HazardKind>> kHazardKinds{
    {"logistic", HazardKind::logistic},
    {"exponential_tail", HazardKind::exponential_tail},
    {"heavy_tail", HazardKind::heavy_tail}};

const std::vector<std::pair<std::string, JumpLaw>> kJumpLaws{
    {"normal", JumpLaw::normal}, {"uniform", JumpLaw::uniform},
    {"rademacher", JumpLaw::rademacher}};

const std::vector<std::pair<std::string, KernelKind>> kKernels{
    {"ou", KernelKind::ou}, {"fbm_increment", KernelKind::fbm_increment}};

template <class E>
std::string name_of(E value, const std::vector<std::pair<std::string, E>>& options) {
  for (const auto& [name, v] : options) {
    if (v == value) return name;
  }
  return "?";
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ModelError(message);
}

void validate_law(const HazardLaw& law, const std::string& which) {
  switch (law.kind) {
    case HazardKind::logistic:
      check(law.scale > 0.0, which + ": logistic scale must be > 0");
      break;
    case HazardKind::exponential_tail:
      check(law.rate > 0.0, which + ": exponential_tail rate must be > 0");
      break;
    case HazardKind::heavy_tail:
      check(law.p > 0.0 && law.p < 1.0, which + ": heavy_tail p must lie in (0, 1)");
      break;
  }
}

// ---- path assembly -------------------------------------------------------

// Values from cell increments, normalised to 0 at the grid anchor.
std::vector<double> anchored_cumsum(const TimeGrid& grid, const std::vector<double>& inc) {
  const std::size_t n = grid.size();
  const std::size_t anchor = grid.anchor_index();
  std::vector<double> values(n, 0.0);
  for (std::size_t i = anchor + 1; i < n; ++i) values[i] = values[i - 1] + inc[i - 1];
  for (std::size_t i = anchor; i > 0; --i) values[i - 1] = values[i] - inc[i - 1];
  return values;
}

double jump_draw(const LevyR& m, Rng& rng) {
  switch (m.jump_law) {
    case JumpLaw::normal:
      return std::normal_distribution<double>(0.0, m.jump_scale)(rng);
    case JumpLaw::uniform:
      return std::uniform_real_distribution<double>(-m.jump_scale, m.jump_scale)(rng);
    case JumpLaw::rademacher:
      return std::bernoulli_distribution(0.5)(rng) ? m.jump_scale : -m.jump_scale;
  }
  return 0.0;
}

struct BumpOutcome {
  bool hit = false;
  double tau_phi = kInf;  // Brownian time of the return to zero, inf if capped
};

// Adds the bump on [a, b) to `values`. The Brownian motion runs on internal
// substeps of variance `dv`; crossings inside a substep are caught with the
// Brownian-bridge crossing probability.
BumpOutcome add_bump(const TimeGrid& grid, double a, double b, double level,
                     double phi_max, double dv, Rng& rng, std::vector<double>& values) {
  BumpOutcome out;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const std::size_t first = grid.index_at_or_before(a);
  double x = 0.0, phi_prev = 0.0;
  bool stopped = false;
  for (std::size_t i = first; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < a) continue;
    if (t >= b) break;
    const double u = (t - a) / (b - a);
    const double phi = u / (1.0 - u);
    if (phi >= phi_max) break;
    if (!stopped && phi > phi_prev) {
      const double span = phi - phi_prev;
      const auto steps = static_cast<std::size_t>(std::ceil(span / dv));
      const double step = span / static_cast<double>(steps);
      const double sd = std::sqrt(step);
      for (std::size_t j = 0; j < steps && !stopped; ++j) {
        const double y = x + sd * normal(rng);
        const double t_end = phi_prev + step * static_cast<double>(j + 1);
        if (!out.hit) {
          if (y > level || (x < level && y < level &&
                            unif(rng) < std::exp(-2.0 * (level - x) * (level - y) / step))) {
            out.hit = true;
            if (y <= 0.0) stopped = true;
          }
        } else if (y <= 0.0 || unif(rng) < std::exp(-2.0 * x * y / step)) {
          stopped = true;
        }
        if (stopped) out.tau_phi = t_end;
        x = y;
      }
      phi_prev = phi;
    }
    if (!stopped) values[i] += x;
  }
  return out;
}

struct HazardTable {
  std::vector<double> a;  // A(t_i)
  std::vector<double> g;  // integral of u h(u) from the anchor to t_i
};

HazardTable hazard_table(const HazardLaw& law, const TimeGrid& grid, double tol) {
  const std::size_t n = grid.size();
  const double cell_tol = tol / static_cast<double>(n);
  auto h = [&law](double u) { return hazard_rate(law, u); };
  auto uh = [&law](double u) { return u * hazard_rate(law, u); };
  HazardTable table{std::vector<double>(n), std::vector<double>(n, 0.0)};
  table.a[0] = cumulative_hazard(law, grid[0], cell_tol);
  for (std::size_t i = 1; i < n; ++i) {
    table.a[i] = table.a[i - 1] + piecewise_integral(law, h, grid[i - 1], grid[i], cell_tol);
  }
  const std::size_t anchor = grid.anchor_index();
  for (std::size_t i = anchor + 1; i < n; ++i) {
    table.g[i] = table.g[i - 1] + piecewise_integral(law, uh, grid[i - 1], grid[i], cell_tol);
  }
  for (std::size_t i = anchor; i > 0; --i) {
    table.g[i - 1] = table.g[i] - piecewise_integral(law, uh, grid[i - 1], grid[i], cell_tol);
  }
  return table;
}

struct HazardDraw {
  double tau;
  std::size_t jump_index;  // first grid index with t >= tau; size() if none
  std::vector<double> n, a, b;
};

HazardDraw hazard_draw(const HazardLaw& law, const HazardTable& table, const TimeGrid& grid,
                       double tol, Rng& rng) {
  const std::size_t n = grid.size();
  double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (p <= 0.0) p = std::numeric_limits<double>::min();
  HazardDraw d{hazard_quantile(law, p), n, {}, {}, {}};
  const auto times = grid.times();
  d.jump_index = static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), d.tau) - times.begin());
  const std::size_t k = d.jump_index;
  double a_tau = 0.0, g_tau = 0.0;
  if (k < n) {
    auto h = [&law](double u) { return hazard_rate(law, u); };
    auto uh = [&law](double u) { return u * hazard_rate(law, u); };
    if (k == 0) {
      a_tau = cumulative_hazard(law, d.tau, tol);
      g_tau = table.g[0] - piecewise_integral(law, uh, d.tau, grid[0], tol);
    } else {
      a_tau = table.a[k - 1] + piecewise_integral(law, h, grid[k - 1], d.tau, tol);
      g_tau = table.g[k - 1] + piecewise_integral(law, uh, grid[k - 1], d.tau, tol);
    }
  }
  d.n.assign(n, 0.0);
  d.a.assign(n, 0.0);
  d.b.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool after = i >= k;
    d.n[i] = after ? 1.0 : 0.0;
    d.a[i] = after ? a_tau : table.a[i];
    d.b[i] = after ? g_tau : table.g[i];
  }
  return d;
}

}  // namespace

// ---- public hazard helpers -------------------------------------------------

double hazard_cdf(const HazardLaw& law, double u) {
  switch (law.kind) {
    case HazardKind::logistic: {
      const double z = (u - law.location) / law.scale;
      return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
    case HazardKind::exponential_tail:
      return u <= law.location ? 0.0 : -std::expm1(-law.rate * (u - law.location));
    case HazardKind::heavy_tail:
      if (u <= -1.0) {
        const double x = -u;
        return heavy_c(law) / (1.0 + x * std::log1p(x));
      }
      return 1.0 - (1.0 - law.p) * std::exp(-heavy_beta(law) * (u + 1.0));
  }
  return 0.0;
}

double hazard_density(const HazardLaw& law, double u) {
  switch (law.kind) {
    case HazardKind::logistic: {
      const double f = hazard_cdf(law, u);
      const double z = (u - law.location) / law.scale;
      const double g = z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
      return f * g / law.scale;
    }
    case HazardKind::exponential_tail:
      return u < law.location ? 0.0 : law.rate * std::exp(-law.rate * (u - law.location));
    case HazardKind::heavy_tail:
      if (u <= -1.0) return heavy_left_density(heavy_c(law), -u);
      return (1.0 - law.p) * heavy_beta(law) * std::exp(-heavy_beta(law) * (u + 1.0));
  }
  return 0.0;
}

double hazard_rate(const HazardLaw& law, double u) {
  switch (law.kind) {
    case HazardKind::logistic:
      return hazard_cdf(law, u) / law.scale;
    case HazardKind::exponential_tail:
      return u < law.location ? 0.0 : law.rate;
    case HazardKind::heavy_tail:
      if (u <= -1.0) return hazard_density(law, u) / (1.0 - hazard_cdf(law, u));
      return heavy_beta(law);
  }
  return 0.0;
}

double hazard_quantile(const HazardLaw& law, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("quantile level must lie in (0, 1)");
  switch (law.kind) {
    case HazardKind::logistic:
      return law.location + law.scale * (std::log(p) - std::log1p(-p));
    case HazardKind::exponential_tail:
      return law.location - std::log1p(-p) / law.rate;
    case HazardKind::heavy_tail: {
      if (p >= law.p) return -1.0 - std::log((1.0 - p) / (1.0 - law.p)) / heavy_beta(law);
      // Solve x log(1 + x) = c / p - 1 for x >= 1 by bisection in log x.
      const double target = heavy_c(law) / p - 1.0;
      auto g = [](double x) { return x * std::log1p(x); };
      double lo = 0.0, hi = 1.0;
      while (g(std::exp(hi)) < target) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(std::exp(mid)) < target ? lo : hi) = mid;
      }
      return -std::exp(0.5 * (lo + hi));
    }
  }
  return 0.0;
}

double cumulative_hazard(const HazardLaw& law, double t, double tol) {
  auto h = [&law](double u) { return hazard_rate(law, u); };
  if (law.kind == HazardKind::exponential_tail) {
    return t <= law.location ? 0.0 : adaptive_simpson(h, law.location, t, tol);
  }
  const double c = std::min(t, -1.0);
  double total = integrate_from_minus_infinity(h, c, 0.5 * tol);
  if (t > c) total += piecewise_integral(law, h, c, t, 0.5 * tol);
  return total;
}

double hazard_moment_integral(const HazardLaw& law, double s, double t, double tol) {
  auto uh = [&law](double u) { return u * hazard_rate(law, u); };
  return piecewise_integral(law, uh, s, t, tol);
}

double heavy_tail_cdf(double s) {
  return hazard_cdf(HazardLaw{HazardKind::heavy_tail}, s);
}

// ---- names and parsing -----------------------------------------------------

std::string model_name(const ModelSpec& model) {
  return std::visit(Overloaded{
                        [](const BrownianR&) { return std::string("brownian_r"); },
                        [](const LevyR&) { return std::string("levy_r"); },
                        [](const Bump&) { return std::string("bump"); },
                        [](const BorelCantelli&) { return std::string("borel_cantelli"); },
                        [](const HazardPair&) { return std::string("hazard_pair"); },
                        [](const InverseBessel3&) { return std::string("inverse_bessel3"); },
                        [](const MovingAverage&) { return std::string("moving_average"); },
                    },
                    model);
}

std::vector<std::string> model_names() {
  return {"brownian_r",  "levy_r",          "bump",          "borel_cantelli",
          "hazard_pair", "inverse_bessel3", "moving_average"};
}

ModelSpec parse_model(const std::string& name,
                      const std::map<std::string, std::string>& params) {
  std::vector<std::string> errors;
  ParamReader r{params, errors, {}};
  ModelSpec model;
  if (name == "brownian_r") {
    model = BrownianR{};
  } else if (name == "levy_r") {
    LevyR m;
    r.real("drift", m.drift);
    r.real("sigma", m.sigma);
    r.real("rate", m.rate);
    r.choice("jump_law", m.jump_law, kJumpLaws);
    r.real("jump_scale", m.jump_scale);
    model = m;
  } else if (name == "bump") {
    Bump m;
    r.real("a", m.a);
    r.real("b", m.b);
    r.real("level", m.level);
    r.real("phi_max", m.phi_max);
    r.real("substep", m.substep);
    model = m;
  } else if (name == "borel_cantelli") {
    BorelCantelli m;
    r.count("n_max", m.n_max);
    r.real("level", m.level);
    r.real("phi_max", m.phi_max);
    r.real("substep", m.substep);
    model = m;
  } else if (name == "hazard_pair") {
    HazardLaw shared;
    r.choice("law", shared.kind, kHazardKinds);
    r.real("location", shared.location);
    r.real("scale", shared.scale);
    r.real("rate", shared.rate);
    r.real("p", shared.p);
    HazardPair m{shared, shared};
    for (int c = 1; c <= 2; ++c) {
      HazardLaw& law = c == 1 ? m.first : m.second;
      const std::string sfx = std::to_string(c);
      r.choice("law" + sfx, law.kind, kHazardKinds);
      r.real("location" + sfx, law.location);
      r.real("scale" + sfx, law.scale);
      r.real("rate" + sfx, law.rate);
      r.real("p" + sfx, law.p);
    }
    model = m;
  } else if (name == "inverse_bessel3") {
    InverseBessel3 m;
    r.real("epsilon", m.epsilon);
    r.text("stretch", m.stretch);
    model = m;
  } else if (name == "moving_average") {
    MovingAverage m;
    r.choice("kernel", m.kernel, kKernels);
    r.real("lambda", m.lambda);
    r.real("hurst", m.hurst);
    r.real("truncation", m.truncation);
    model = m;
  } else {
    std::string valid;
    for (const auto& n : model_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigurationError("model: unknown model '" + name + "' (valid: " + valid + ")");
  }
  r.finish();
  if (errors.empty()) {
    try {
      validate(model);
    } catch (const ModelError& e) {
      errors.push_back(std::string("model: ") + e.what());
    }
  }
  if (!errors.empty()) {
    std::string joined;
    for (const auto& e : errors) joined += (joined.empty() ? "" : "\n") + e;
    throw ConfigurationError(joined);
  }
  return model;
}

std::map<std::string, std::string> model_params(const ModelSpec& model) {
  return std::visit(
      Overloaded{
          [](const BrownianR&) { return std::map<std::string, std::string>{}; },
          [](const LevyR& m) {
            return std::map<std::string, std::string>{
                {"drift", fmt(m.drift)},
                {"sigma", fmt(m.sigma)},
                {"rate", fmt(m.rate)},
                {"jump_law", name_of(m.jump_law, kJumpLaws)},
                {"jump_scale", fmt(m.jump_scale)}};
          },
          [](const Bump& m) {
            return std::map<std::string, std::string>{{"a", fmt(m.a)},
                                                      {"b", fmt(m.b)},
                                                      {"level", fmt(m.level)},
                                                      {"phi_max", fmt(m.phi_max)},
                                                      {"substep", fmt(m.substep)}};
          },
          [](const BorelCantelli& m) {
            return std::map<std::string, std::string>{{"n_max", std::to_string(m.n_max)},
                                                      {"level", fmt(m.level)},
                                                      {"phi_max", fmt(m.phi_max)},
                                                      {"substep", fmt(m.substep)}};
          },
          [](const HazardPair& m) {
            std::map<std::string, std::string> out;
            for (int c = 1; c <= 2; ++c) {
              const HazardLaw& law = c == 1 ? m.first : m.second;
              const std::string sfx = std::to_string(c);
              out["law" + sfx] = name_of(law.kind, kHazardKinds);
              out["location" + sfx] = fmt(law.location);
              out["scale" + sfx] = fmt(law.scale);
              out["rate" + sfx] = fmt(law.rate);
              out["p" + sfx] = fmt(law.p);
            }
            return out;
          },
          [](const InverseBessel3& m) {
            return std::map<std::string, std::string>{{"epsilon", fmt(m.epsilon)},
                                                      {"stretch", m.stretch}};
          },
          [](const MovingAverage& m) {
            return std::map<std::string, std::string>{{"kernel", name_of(m.kernel, kKernels)},
                                                      {"lambda", fmt(m.lambda)},
                                                      {"hurst", fmt(m.hurst)},
                                                      {"truncation", fmt(m.truncation)}};
          },
      },
      model);
}

void validate(const ModelSpec& model) {
  std::visit(Overloaded{
                 [](const BrownianR&) {},
                 [](const LevyR& m) {
                   check(std::isfinite(m.drift), "levy_r drift must be finite");
                   check(m.sigma >= 0.0, "levy_r sigma must be >= 0");
                   check(m.rate >= 0.0, "levy_r rate must be >= 0");
                   check(m.jump_scale >= 0.0, "levy_r jump_scale must be >= 0");
                 },
                 [](const Bump& m) {
                   check(m.a < m.b, "bump needs a < b");
                   check(m.level > 0.0, "bump level must be > 0");
                   check(m.phi_max > 0.0, "bump phi_max must be > 0");
                   check(m.substep > 0.0, "bump substep must be > 0");
                 },
                 [](const BorelCantelli& m) {
                   check(m.n_max >= 1, "borel_cantelli n_max must be >= 1");
                   check(m.level > 0.0, "borel_cantelli level must be > 0");
                   check(m.phi_max > 0.0, "borel_cantelli phi_max must be > 0");
                   check(m.substep > 0.0, "borel_cantelli substep must be > 0");
                 },
                 [](const HazardPair& m) {
                   validate_law(m.first, "hazard_pair component 1");
                   validate_law(m.second, "hazard_pair component 2");
                 },
                 [](const InverseBessel3& m) {
                   check(m.epsilon > 0.0, "inverse_bessel3 epsilon must be > 0");
                   check(m.stretch == "log", "inverse_bessel3 stretch must be 'log'");
                 },
                 [](const MovingAverage& m) {
                   check(m.lambda > 0.0, "moving_average lambda must be > 0");
                   check(m.hurst > 0.0 && m.hurst < 1.0, "moving_average hurst must lie in (0, 1)");
                   check(m.truncation > 0.0, "moving_average truncation must be > 0");
                 },
             },
             model);
}

// ---- sampler ---------------------------------------------------------------

struct Sampler::Impl {
  ModelSpec model;
  GridPtr grid;
  SampleOptions options;
  double quad_tol = 1e-8;
  HazardTable hazard[2];
  std::vector<double> ma_times;  // pre-history followed by the grid
  std::size_t ma_offset = 0;     // index of grid[0] in ma_times

  PathBundle brownian(Rng& rng) const {
    const TimeGrid& g = *grid;
    std::vector<double> inc(g.cells());
    std::normal_distribution<double> normal;
    for (std::size_t i = 1; i < g.size(); ++i) inc[i - 1] = std::sqrt(g.width(i)) * normal(rng);
    return {SamplePath(grid, anchored_cumsum(g, inc), {}, Interpolation::linear_continuous),
            std::nullopt, std::nullopt, {}, {}};
  }

  PathBundle levy(const LevyR& m, Rng& rng) const {
    const TimeGrid& g = *grid;
    std::vector<double> inc(g.cells());
    std::vector<Jump<double>> jumps;
    std::normal_distribution<double> normal;
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double dt = g.width(i);
      double x = m.drift * dt + m.sigma * std::sqrt(dt) * normal(rng);
      if (m.rate > 0.0) {
        const auto count = std::poisson_distribution<long>(m.rate * dt)(rng);
        double j = 0.0;
        for (long c = 0; c < count; ++c) j += jump_draw(m, rng);
        if (j != 0.0) jumps.push_back({i, j});
        x += j;
      }
      inc[i - 1] = x;
    }
    return {SamplePath(grid, anchored_cumsum(g, inc), std::move(jumps)), std::nullopt,
            std::nullopt, {}, {}};
  }

  PathBundle bump(const Bump& m, Rng& rng) const {
    std::vector<double> values(grid->size(), 0.0);
    const auto out = add_bump(*grid, m.a, m.b, m.level, m.phi_max,
                              m.substep * m.level * m.level, rng, values);
    PathBundle bundle{SamplePath(grid, std::move(values), {}, Interpolation::linear_continuous),
                      std::nullopt, std::nullopt, {}, {}};
    bundle.marks["hit"] = {out.hit ? 1.0 : 0.0};
    bundle.marks["tau_phi"] = {out.tau_phi};
    return bundle;
  }

  PathBundle borel(const BorelCantelli& m, std::uint64_t seed, Rng& rng) const {
    std::vector<double> values(grid->size(), 0.0);
    std::vector<double> theta(m.n_max, 0.0);
    for (std::size_t n = 1; n <= m.n_max; ++n) {
      theta[n - 1] = std::bernoulli_distribution(1.0 / static_cast<double>(n))(rng) ? 1.0 : 0.0;
    }
    // Each bump has its own stream so skipping the theta = 0 ones is free.
    for (std::size_t n = 1; n <= m.n_max; ++n) {
      if (theta[n - 1] == 0.0) continue;
      Rng bump_rng = make_rng(derive_seed(seed, n));
      const double a = -static_cast<double>(n);
      add_bump(*grid, a, a + 1.0, m.level, m.phi_max, m.substep * m.level * m.level, bump_rng,
               values);
    }
    PathBundle bundle{SamplePath(grid, std::move(values), {}, Interpolation::linear_continuous),
                      std::nullopt, std::nullopt, {}, {}};
    bundle.marks["theta"] = std::move(theta);
    return bundle;
  }

  PathBundle hazard_pair(const HazardPair& m, Rng& rng) const {
    const HazardLaw* laws[2] = {&m.first, &m.second};
    HazardDraw draws[2] = {hazard_draw(*laws[0], hazard[0], *grid, quad_tol, rng),
                           hazard_draw(*laws[1], hazard[1], *grid, quad_tol, rng)};
    auto jump_list = [&](const HazardDraw& d, double size) {
      std::vector<Jump<double>> j;
      if (d.jump_index >= 1 && d.jump_index < grid->size()) j.push_back({d.jump_index, size});
      return j;
    };
    auto martingale = [&](const HazardDraw& d) {
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.n[i] - d.a[i];
      return SamplePath(grid, std::move(v), jump_list(d, 1.0));
    };
    auto x_path = [&](const HazardDraw& d) {
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.tau * d.n[i] - d.b[i];
      return SamplePath(grid, std::move(v), jump_list(d, d.tau));
    };
    PathBundle bundle{martingale(draws[0]),
                      SamplePath(grid, draws[0].a, {}, Interpolation::linear_continuous),
                      SamplePath(grid, draws[0].n, jump_list(draws[0], 1.0)),
                      {},
                      {}};
    bundle.marks["tau1"] = {draws[0].tau};
    bundle.marks["tau2"] = {draws[1].tau};
    if (options.auxiliary) {
      bundle.extras.emplace("M2", martingale(draws[1]));
      bundle.extras.emplace("A2", SamplePath(grid, draws[1].a, {}, Interpolation::linear_continuous));
      bundle.extras.emplace("N2", SamplePath(grid, draws[1].n, jump_list(draws[1], 1.0)));
      bundle.extras.emplace("B1", SamplePath(grid, draws[0].b, {}, Interpolation::linear_continuous));
      bundle.extras.emplace("B2", SamplePath(grid, draws[1].b, {}, Interpolation::linear_continuous));
      bundle.extras.emplace("X1", x_path(draws[0]));
      bundle.extras.emplace("X2", x_path(draws[1]));
    }
    return bundle;
  }

  PathBundle inverse_bessel(const InverseBessel3& m, Rng& rng) const {
    const TimeGrid& g = *grid;
    std::normal_distribution<double> normal;
    double w[3] = {m.epsilon, 0.0, 0.0};
    double r_prev = 0.0;
    std::vector<double> x(g.size()), radius(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = std::exp(g[i]);
      const double sd = std::sqrt(r - r_prev);
      for (double& c : w) c += sd * normal(rng);
      radius[i] = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
      x[i] = 1.0 / radius[i];
      r_prev = r;
    }
    return {SamplePath(grid, std::move(x), {}, Interpolation::linear_continuous), std::nullopt,
            SamplePath(grid, std::move(radius), {}, Interpolation::linear_continuous), {}, {}};
  }

  PathBundle moving_average(const MovingAverage& m, Rng& rng) const {
    const std::size_t total = ma_times.size();
    std::vector<double> dw(total, 0.0);  // dw[j]: driver increment over (u_{j-1}, u_j]
    std::normal_distribution<double> normal;
    for (std::size_t j = 1; j < total; ++j) dw[j] = std::sqrt(ma_times[j] - ma_times[j - 1]) * normal(rng);

    auto kernel = [&m](double t, double u) {
      if (m.kernel == KernelKind::ou) return std::exp(-m.lambda * (t - u));
      auto phi = [&m](double v) { return v > 0.0 ? std::pow(v, m.hurst - 0.5) : 0.0; };
      return phi(t - u) - phi(-u);
    };

    const TimeGrid& g = *grid;
    std::vector<double> x(g.size(), 0.0);
    std::size_t start = 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t last = ma_offset + i;
      const double t = ma_times[last];
      while (start <= last && t - ma_times[start - 1] > m.truncation) ++start;
      double sum = 0.0;
      for (std::size_t j = start; j <= last; ++j) sum += kernel(t, ma_times[j - 1]) * dw[j];
      x[i] = sum;
    }
    std::vector<double> inc(g.cells());
    for (std::size_t i = 1; i < g.size(); ++i) inc[i - 1] = dw[ma_offset + i];
    return {SamplePath(grid, std::move(x), {}, Interpolation::linear_continuous), std::nullopt,
            SamplePath(grid, anchored_cumsum(g, inc), {}, Interpolation::linear_continuous), {},
            {}};
  }
};

Sampler::Sampler(ModelSpec model, GridPtr grid, SampleOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!grid) throw ArgumentError("Sampler needs a grid");
  validate(model);
  impl_->model = std::move(model);
  impl_->grid = std::move(grid);
  impl_->options = options;
  const TimeGrid& g = *impl_->grid;
  std::visit(
      Overloaded{
          [](const auto&) {},
          [&](const Bump& m) {
            if (m.a < g.t_min() || m.b > g.t_max()) {
              throw ConfigurationError("bump interval [" + fmt(m.a) + ", " + fmt(m.b) +
                                       "] is not inside the grid span");
            }
          },
          [&](const BorelCantelli& m) {
            if (g.t_min() > -static_cast<double>(m.n_max) || g.t_max() < 0.0) {
              throw ConfigurationError("borel_cantelli needs a grid spanning [-n_max, 0]");
            }
          },
          [&](const HazardPair& m) {
            impl_->hazard[0] = hazard_table(m.first, g, impl_->quad_tol);
            impl_->hazard[1] = hazard_table(m.second, g, impl_->quad_tol);
          },
          [&](const MovingAverage& m) {
            const double dt = g.width(1);
            const auto pre = static_cast<std::size_t>(std::ceil(m.truncation / dt));
            impl_->ma_times.reserve(pre + g.size());
            for (std::size_t j = pre; j > 0; --j) {
              impl_->ma_times.push_back(g.t_min() - dt * static_cast<double>(j));
            }
            impl_->ma_offset = pre;
            for (double t : g.times()) impl_->ma_times.push_back(t);
          },
      },
      impl_->model);
}

Sampler::~Sampler() = default;
Sampler::Sampler(Sampler&&) noexcept = default;
Sampler& Sampler::operator=(Sampler&&) noexcept = default;

const ModelSpec& Sampler::model() const { return impl_->model; }
const GridPtr& Sampler::grid() const { return impl_->grid; }

PathBundle Sampler::operator()(std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  const Impl& s = *impl_;
  return std::visit(Overloaded{
                        [&](const BrownianR&) { return s.brownian(rng); },
                        [&](const LevyR& m) { return s.levy(m, rng); },
                        [&](const Bump& m) { return s.bump(m, rng); },
                        [&](const BorelCantelli& m) { return s.borel(m, seed, rng); },
                        [&](const HazardPair& m) { return s.hazard_pair(m, rng); },
                        [&](const InverseBessel3& m) { return s.inverse_bessel(m, rng); },
                        [&](const MovingAverage& m) { return s.moving_average(m, rng); },
                    },
                    s.model);
}

PathBundle sample(const ModelSpec& model, const GridPtr& grid, std::uint64_t seed) {
  return Sampler(model, grid)(seed);
}

SamplePath compensator_path(const ModelSpec& model, const PathBundle& bundle) {
  if (!std::holds_alternative<HazardPair>(model)) {
    throw ArgumentError("compensator_path needs a hazard_pair model, got " + model_name(model));
  }
  if (!bundle.compensator) throw ArgumentError("hazard bundle carries no compensator");
  return *bundle.compensator;
}

}  // namespace incmart
