#include "incmart/cli/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "incmart/errors.hpp"
#include "incmart/path_io.hpp"
#include "incmart/integration.hpp"

namespace incmart::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_real(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<long long> to_integer(const std::string& s) {
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end == s.c_str() || *end != '\0' || errno == ERANGE) return std::nullopt;
  return v;
}

void raise(const std::vector<std::string>& errors) {
  if (errors.empty()) return;
  std::string joined;
  for (const auto& e : errors) joined += (joined.empty() ? "" : "\n") + e;
  throw ConfigurationError(joined);
}

void check_grid(const GridSpec& g, std::vector<std::string>& errors) {
  if (!(g.t_min < g.t_max)) errors.push_back("grid: t_min must be < t_max");
  if (g.n_cells < 2) errors.push_back("grid: n_cells must be >= 2, got " + std::to_string(g.n_cells));
}

}  // namespace

GridPtr GridSpec::build() const {
  return make_grid(TimeGrid::make(t_min, t_max, n_cells, spacing));
}

std::string to_string(GridSpacing spacing) {
  return spacing == GridSpacing::uniform ? "uniform" : "log_tail";
}

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string p; std::getline(in, p, ':');) parts.push_back(trim(p));
  if (parts.size() != 3) {
    throw ConfigurationError("grid: expected t_min:t_max:n_cells, got '" + text + "'");
  }
  GridSpec g;
  std::vector<std::string> errors;
  const auto lo = to_real(parts[0]), hi = to_real(parts[1]);
  const auto n = to_integer(parts[2]);
  if (!lo) errors.push_back("grid: bad t_min '" + parts[0] + "'");
  if (!hi) errors.push_back("grid: bad t_max '" + parts[1] + "'");
  if (!n) errors.push_back("grid: bad n_cells '" + parts[2] + "'");
  raise(errors);
  g.t_min = *lo;
  g.t_max = *hi;
  g.n_cells = *n < 0 ? 0 : static_cast<std::size_t>(*n);
  check_grid(g, errors);
  raise(errors);
  return g;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> errors;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + "unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "test" && section != "integrand") {
        errors.push_back(where + "unknown section [" + section + "] (valid: model, test, integrand)");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string qualified = (section.empty() ? "" : section + ".") + key;
    if (!seen.insert(qualified).second) errors.push_back(where + qualified + ": duplicate key");

    if (section == "model") {
      c.model_params[key] = value;
    } else if (section == "test") {
      if (!kTestKeys.count(key)) {
        errors.push_back(where + "test." + key + ": unknown key");
      } else {
        c.test[key] = value;
      }
    } else if (section == "integrand") {
      if (!kIntegrandKeys.count(key)) {
        errors.push_back(where + "integrand." + key + ": unknown key (valid: phi, psi)");
      } else {
        try {
          Integrand::parse(value);
          c.integrand[key] = value;
        } catch (const ConfigurationError& e) {
          errors.push_back(where + e.what());
        }
      }
    } else if (!section.empty()) {
      // Unknown section already reported.
    } else if (key == "name") {
      c.name = value;
    } else if (key == "model") {
      c.model_name = value;
    } else if (key == "grid") {
      try {
        const GridSpacing keep = c.grid.spacing;
        c.grid = parse_grid(value);
        c.grid.spacing = keep;
      } catch (const ConfigurationError& e) {
        errors.push_back(where + e.what());
      }
    } else if (key == "spacing") {
      if (value == "uniform") {
        c.grid.spacing = GridSpacing::uniform;
      } else if (value == "log_tail" || value == "log-tail") {
        c.grid.spacing = GridSpacing::log_tail;
      } else {
        errors.push_back(where + "spacing: unknown value '" + value + "' (valid: uniform, log_tail)");
      }
    } else if (key == "paths") {
      const auto n = to_integer(value);
      if (!n) {
        errors.push_back(where + "paths: expected an integer, got '" + value + "'");
      } else if (*n < 1) {
        errors.push_back(where + "paths: must be >= 1, got " + value);
      } else {
        c.n_paths = static_cast<std::size_t>(*n);
      }
    } else if (key == "seed") {
      char* end = nullptr;
      errno = 0;
      const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
      if (value.empty() || value[0] == '-' || *end != '\0' || errno == ERANGE) {
        errors.push_back(where + "seed: expected a non-negative 64-bit integer, got '" + value + "'");
      } else {
        c.seed = v;
      }
    } else if (key == "threads") {
      const auto n = to_integer(value);
      if (!n || *n < 1 || *n > 1024) {
        errors.push_back(where + "threads: expected an integer in [1, 1024], got '" + value + "'");
      } else {
        c.threads = static_cast<unsigned>(*n);
      }
    } else if (key == "out") {
      c.out = value;
    } else {
      errors.push_back(where + key +
                       ": unknown key (valid: name, model, grid, spacing, paths, seed, threads, out)");
    }
  }

  if (c.model_name) {
    try {
      c.model = parse_model(*c.model_name, c.model_params);
    } catch (const ConfigurationError& e) {
      std::istringstream lines(e.what());
      for (std::string l; std::getline(lines, l);) errors.push_back(l);
    }
  } else if (!c.model_params.empty()) {
    errors.push_back("model: [model] parameters given without a model name");
  }
  for (const auto& [key, value] : c.test) {
    if (kTestListKeys.count(key)) {
      std::stringstream list(value);
      for (std::string item; std::getline(list, item, ',');) {
        if (!to_real(trim(item))) errors.push_back("test." + key + ": bad number '" + trim(item) + "'");
      }
    } else if (!to_real(value)) {
      errors.push_back("test." + key + ": expected a number, got '" + value + "'");
    }
  }
  raise(errors);
  return c;
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  check_grid(c.grid, errors);
  if (c.n_paths < 1) errors.push_back("paths: must be >= 1");
  if (c.threads < 1) errors.push_back("threads: must be >= 1");
  try {
    incmart::validate(c.model);
  } catch (const ModelError& e) {
    errors.push_back(std::string("model: ") + e.what());
  }
  raise(errors);
}

double ExperimentConfig::test_real(const std::string& key, double fallback) const {
  auto it = test.find(key);
  return it == test.end() ? fallback : *to_real(it->second);
}

std::size_t ExperimentConfig::test_count(const std::string& key, std::size_t fallback) const {
  auto it = test.find(key);
  if (it == test.end()) return fallback;
  const double v = *to_real(it->second);
  if (v < 0 || v != std::floor(v)) throw ConfigurationError("test." + key + ": expected a count");
  return static_cast<std::size_t>(v);
}

std::vector<double> ExperimentConfig::test_list(const std::string& key,
                                                std::vector<double> fallback) const {
  auto it = test.find(key);
  if (it == test.end()) return fallback;
  std::vector<double> out;
  std::stringstream list(it->second);
  for (std::string item; std::getline(list, item, ',');) out.push_back(*to_real(trim(item)));
  return out;
}

std::string ExperimentConfig::integrand_text(const std::string& key,
                                             const std::string& fallback) const {
  auto it = integrand.find(key);
  return it == integrand.end() ? fallback : it->second;
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  if (!c.name.empty()) out << "name = " << c.name << '\n';
  if (c.model_name) out << "model = " << *c.model_name << '\n';
  out << "grid = " << format_double(c.grid.t_min) << ':' << format_double(c.grid.t_max) << ':'
      << c.grid.n_cells << '\n';
  out << "spacing = " << to_string(c.grid.spacing) << '\n';
  out << "paths = " << c.n_paths << '\n';
  out << "seed = " << c.seed << '\n';
  out << "threads = " << c.threads << '\n';
  out << "out = " << c.out << '\n';
  if (c.model_name) {
    out << "\n[model]\n";
    for (const auto& [k, v] : c.model_params) out << k << " = " << v << '\n';
  }
  if (!c.test.empty()) {
    out << "\n[test]\n";
    for (const auto& [k, v] : c.test) out << k << " = " << v << '\n';
  }
  if (!c.integrand.empty()) {
    out << "\n[integrand]\n";
    for (const auto& [k, v] : c.integrand) out << k << " = " << v << '\n';
  }
  return out.str();
}

}  // namespace incmart::cli
