#pragma once

// Line-oriented experiment configuration:
//
//   name = hazard_martingale
//   model = hazard_pair
//   grid = -20:5:250
//   spacing = uniform        # or log_tail
//   paths = 20000
//   seed = 1
//
//   [model]
//   law = logistic
//
//   [test]
//   buckets = 5
//
//   [integrand]
//   phi = exp(1)
//
// `#` and `;` start comments. Keys outside a section are top-level.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "incmart/process_zoo.hpp"
#include "incmart/time_grid.hpp"

namespace incmart::cli {

struct GridSpec {
  double t_min = -10.0;
  double t_max = 0.0;
  std::size_t n_cells = 1000;
  GridSpacing spacing = GridSpacing::uniform;

  GridPtr build() const;
};

struct ExperimentConfig {
  std::string name;
  std::optional<std::string> model_name;
  ModelSpec model = BrownianR{};
  std::map<std::string, std::string> model_params;
  GridSpec grid;
  std::size_t n_paths = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";
  std::map<std::string, std::string> test;
  std::map<std::string, std::string> integrand;

  double test_real(const std::string& key, double fallback) const;
  std::size_t test_count(const std::string& key, std::size_t fallback) const;
  std::vector<double> test_list(const std::string& key, std::vector<double> fallback) const;
  std::string integrand_text(const std::string& key, const std::string& fallback) const;
};

inline const std::set<std::string> kTestKeys{
    "buckets", "s", "t", "tol", "level", "cutoffs", "times", "epsilons",
    "refine_cells", "refine_paths", "max_off_diagonal"};
// Keys holding comma-separated numbers.
inline const std::set<std::string> kTestListKeys{"cutoffs", "times", "epsilons"};
inline const std::set<std::string> kIntegrandKeys{"phi", "psi"};

/// Parses and validates; ConfigurationError lists every problem, one per line.
ExperimentConfig parse_config(const std::string& text);

/// `t_min:t_max:n`; ConfigurationError on malformed input.
GridSpec parse_grid(const std::string& text);

/// Re-checks ranges after programmatic overrides.
void validate(const ExperimentConfig& config);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& config);

std::string to_string(GridSpacing spacing);

}  // namespace incmart::cli
