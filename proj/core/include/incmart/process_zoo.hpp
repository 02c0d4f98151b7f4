#pragma once

// Samplers for the example processes. Each returns a PathBundle whose member
// paths share one grid; sampling is a pure function of (model, grid, seed).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "incmart/sample_path.hpp"

namespace incmart {

struct BrownianR {};

enum class JumpLaw { normal, uniform, rademacher };

struct LevyR {
  double drift = 0.0;
  double sigma = 1.0;
  double rate = 0.0;        // compound-Poisson intensity
  JumpLaw jump_law = JumpLaw::normal;
  double jump_scale = 1.0;  // sd for normal, half-width for uniform, size for rademacher
};

struct Bump {
  double a = -1.0;
  double b = 0.0;
  double level = 1.0;     // k
  double phi_max = 1e3;   // cap on the time change
  // Variance of the internal Brownian substeps, as a fraction of level^2.
  double substep = 1.0 / 32.0;
};

struct BorelCantelli {
  std::size_t n_max = 200;
  double level = 1.0;
  double phi_max = 1e3;
  double substep = 1.0 / 32.0;
};

enum class HazardKind { logistic, exponential_tail, heavy_tail };

/// Law of one event time tau. Parameters by kind:
///   logistic          F(u) = 1 / (1 + exp(-(u - location) / scale))
///   exponential_tail  F(u) = 1 - exp(-rate (u - location)) for u >= location
///   heavy_tail        F(s) = c / (1 + |s| log(1 + |s|)) for s <= -1 with
///                     c = p (1 + log 2) and p = F(-1); exponential on s > -1
///                     with the rate that keeps the density continuous
struct HazardLaw {
  HazardKind kind = HazardKind::logistic;
  double location = 0.0;
  double scale = 1.0;
  double rate = 1.0;
  double p = 0.99;
};

struct HazardPair {
  HazardLaw first;
  HazardLaw second;
};

struct InverseBessel3 {
  double epsilon = 0.1;
  // Only the log stretch is implemented: Bessel time r = exp(t).
  std::string stretch = "log";
};

enum class KernelKind { ou, fbm_increment };

struct MovingAverage {
  KernelKind kernel = KernelKind::ou;
  double lambda = 1.0;
  double hurst = 0.75;
  double truncation = 10.0;
};

using ModelSpec = std::variant<BrownianR, LevyR, Bump, BorelCantelli, HazardPair,
                               InverseBessel3, MovingAverage>;

std::string model_name(const ModelSpec& model);
std::vector<std::string> model_names();

/// Builds a model from its canonical name and `key = value` parameters.
/// Throws ConfigurationError listing every problem found.
ModelSpec parse_model(const std::string& name,
                      const std::map<std::string, std::string>& params);
std::map<std::string, std::string> model_params(const ModelSpec& model);

/// Validates parameter ranges; ModelError on failure.
void validate(const ModelSpec& model);

struct PathBundle {
  SamplePath path;
  std::optional<SamplePath> compensator;
  std::optional<SamplePath> driver;
  std::map<std::string, SamplePath> extras;
  std::map<std::string, std::vector<double>> marks;
};

struct SampleOptions {
  // Hazard models: also keep M2, A2, N2 and the B and X processes.
  bool auxiliary = true;
};

/// Grid-dependent precomputation (quadrature tables, bump schedules) done once;
/// calling the sampler is then cheap and thread-safe.
class Sampler {
 public:
  Sampler(ModelSpec model, GridPtr grid, SampleOptions options = {});
  ~Sampler();
  Sampler(Sampler&&) noexcept;
  Sampler& operator=(Sampler&&) noexcept;

  PathBundle operator()(std::uint64_t seed) const;
  const ModelSpec& model() const;
  const GridPtr& grid() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

PathBundle sample(const ModelSpec& model, const GridPtr& grid, std::uint64_t seed);

/// The compensator A of a hazard bundle; ArgumentError for other models.
SamplePath compensator_path(const ModelSpec& model, const PathBundle& bundle);

// Hazard-law helpers.
double hazard_cdf(const HazardLaw& law, double u);
double hazard_density(const HazardLaw& law, double u);
double hazard_rate(const HazardLaw& law, double u);
double hazard_quantile(const HazardLaw& law, double p);
/// A(t) = integral of f / (1 - F) over (-inf, t], by quadrature.
double cumulative_hazard(const HazardLaw& law, double t, double tol = 1e-8);
/// Integral of u f(u) / (1 - F(u)) over [s, t].
double hazard_moment_integral(const HazardLaw& law, double s, double t, double tol = 1e-8);

/// The slow-tail CDF with the default p.
double heavy_tail_cdf(double s);

}  // namespace incmart
