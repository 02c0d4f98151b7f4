#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "incmart/errors.hpp"
#include "incmart/finite_space.hpp"

using namespace incmart;

namespace {

std::vector<double> integer_times(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
  return t;
}

FiniteFilteredSpace fair_tree(std::size_t depth) {
  return FiniteFilteredSpace::binary_tree(depth, integer_times(depth + 1),
                                          [](std::size_t, std::size_t) { return 0.5; });
}

/// Walk with steps +-1 and an extra drift per step.
FiniteProcess walk(const FiniteFilteredSpace& space, std::size_t depth, double drift = 0.0) {
  FiniteProcess x(depth + 1, space.outcomes());
  for (std::size_t w = 0; w < space.outcomes(); ++w) {
    for (std::size_t k = 1; k <= depth; ++k) {
      const bool up = (w >> (depth - k)) & 1U;
      x.at(k, w) = x.at(k - 1, w) + (up ? 1.0 : -1.0) + drift;
    }
  }
  return x;
}

/// Random martingale plus a remainder Z - E[Z | F_t] on a depth-6 tree with
/// biased branches.
struct Constructed {
  FiniteFilteredSpace space;
  FiniteProcess k, n, m;
};

Constructed construct(std::uint64_t seed) {
  constexpr std::size_t depth = 6;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.8);
  std::vector<std::vector<double>> q(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    q[l].resize(std::size_t{1} << l);
    for (double& p : q[l]) p = u(rng);
  }
  auto space = FiniteFilteredSpace::binary_tree(
      depth, integer_times(depth + 1), [&](std::size_t l, std::size_t node) { return q[l][node]; });
  FiniteProcess k(depth + 1, space.outcomes());
  for (std::size_t w = 0; w < space.outcomes(); ++w) {
    for (std::size_t l = 1; l <= depth; ++l) {
      const bool up = (w >> (depth - l)) & 1U;
      const double p = q[l - 1][w >> (depth - l + 1)];
      k.at(l, w) = k.at(l - 1, w) + (up ? 1.0 - p : -p);
    }
  }
  // Z is only revealed at the end, so N_t = Z - E[Z | F_t] is not adapted.
  std::vector<double> z(space.outcomes());
  std::normal_distribution<double> g;
  for (double& v : z) v = g(rng);
  FiniteProcess n(depth + 1, space.outcomes());
  for (std::size_t l = 0; l <= depth; ++l) {
    const auto c = space.conditional_expectation(z, l);
    for (std::size_t w = 0; w < space.outcomes(); ++w) n.at(l, w) = z[w] - c[w];
  }
  FiniteProcess m = k + n;
  return {std::move(space), std::move(k), std::move(n), std::move(m)};
}

}  // namespace

TEST(FiniteSpace, ValidatesConstruction) {
  EXPECT_THROW(FiniteFilteredSpace({0.5, 0.6}, {0}, {{0, 0}}), ArgumentError);
  EXPECT_THROW(FiniteFilteredSpace({1.0, 0.0}, {0}, {{0, 0}}), ArgumentError);
  EXPECT_THROW(FiniteFilteredSpace({0.5, 0.5}, {1, 0}, {{0, 0}, {0, 1}}), ArgumentError);
  // Coarsening over time is not a filtration.
  EXPECT_THROW(FiniteFilteredSpace({0.5, 0.5}, {0, 1}, {{0, 1}, {0, 0}}), ArgumentError);
  EXPECT_THROW(fair_tree(0), ArgumentError);
}

TEST(ConditionalExpectation, SpecExamples) {
  const FiniteFilteredSpace two({0.25, 0.75}, {0, 1}, {{0, 0}, {0, 1}});
  const std::vector<double> x{4, 0};
  for (double v : two.conditional_expectation(x, 0)) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_EQ(two.conditional_expectation(x, 1), x);
  EXPECT_DOUBLE_EQ(two.expectation(x), 1.0);
}

TEST(ConditionalExpectation, TowerProperty) {
  const auto c = construct(3);
  std::vector<double> x(c.space.outcomes());
  for (std::size_t w = 0; w < x.size(); ++w) x[w] = std::sin(static_cast<double>(w));
  for (std::size_t k = 0; k < c.space.n_times(); ++k) {
    for (std::size_t l = k; l < c.space.n_times(); ++l) {
      const auto direct = c.space.conditional_expectation(x, k);
      const auto tower = c.space.conditional_expectation(c.space.conditional_expectation(x, l), k);
      for (std::size_t w = 0; w < x.size(); ++w) EXPECT_NEAR(direct[w], tower[w], 1e-14);
    }
  }
}

TEST(IsMartingale, SpecExamples) {
  const auto space = fair_tree(6);
  const MartingaleVerdict constant = is_martingale(space, FiniteProcess(7, space.outcomes(), 3.0));
  EXPECT_TRUE(constant.holds);
  EXPECT_EQ(constant.max_defect, 0.0);
  EXPECT_TRUE(is_martingale(space, walk(space, 6)).holds);
  const MartingaleVerdict drifted = is_martingale(space, walk(space, 6, 0.1));
  EXPECT_FALSE(drifted.holds);
  EXPECT_GE(drifted.max_defect, 0.1 - 1e-12);
}

TEST(IsMartingale, RejectsNonAdapted) {
  const auto c = construct(1);
  EXPECT_FALSE(is_adapted(c.space, c.m));
  EXPECT_THROW(is_martingale(c.space, c.m), AdaptednessError);
  EXPECT_THROW(AdaptedFiniteProcess(c.space, c.m), AdaptednessError);
}

TEST(IncrementMartingale, TerminalVariableCancels) {
  const auto space = fair_tree(6);
  FiniteProcess m = walk(space, 6);
  for (std::size_t w = 0; w < space.outcomes(); ++w) {
    const double z = static_cast<double>(w % 5);
    for (std::size_t k = 0; k < 7; ++k) m.at(k, w) += z;
  }
  EXPECT_TRUE(check_increment_martingale(space, m).holds);
  EXPECT_THROW(is_martingale(space, m), AdaptednessError);
  EXPECT_TRUE(check_increment_martingale(space, walk(space, 6)).holds);
  EXPECT_FALSE(check_increment_martingale(space, walk(space, 6, 0.1)).holds);
}

TEST(IncrementMartingale, RejectsNonAdaptedIncrements) {
  const auto space = fair_tree(3);
  FiniteProcess m(4, space.outcomes());
  // Increment 0 -> 1 reveals the last bit early.
  for (std::size_t w = 0; w < space.outcomes(); ++w) m.at(1, w) = (w & 1U) ? 1.0 : -1.0;
  EXPECT_THROW(check_increment_martingale(space, m), AdaptednessError);
}

TEST(Decompose, MartingaleIsItsOwnMartingalePart) {
  const auto space = fair_tree(6);
  const FiniteProcess m = walk(space, 6);
  const Decomposition d = decompose(space, m);
  EXPECT_LE(d.martingale.max_abs_difference(m), 1e-12);
  EXPECT_LE(d.remainder.max_abs_difference(FiniteProcess(7, space.outcomes())), 1e-12);
}

TEST(Decompose, RecoversConstructedParts) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = construct(seed);
    const Decomposition d = decompose(c.space, c.m);
    EXPECT_LE(d.martingale.max_abs_difference(c.k), 1e-12);
    EXPECT_LE(d.remainder.max_abs_difference(c.n), 1e-12);
    const auto en2 = second_moments(c.space, d.remainder);
    const auto ek2 = second_moments(c.space, d.martingale);
    const auto em2 = second_moments(c.space, c.m);
    for (std::size_t k = 0; k < en2.size(); ++k) {
      if (k > 0) { EXPECT_LE(en2[k], en2[k - 1] + 1e-12); }
      EXPECT_NEAR(em2[k], ek2[k] + en2[k], 1e-12);
      if (k > 0) { EXPECT_GE(ek2[k], ek2[k - 1] - 1e-12); }
      const auto cond = c.space.conditional_expectation(d.remainder.column(k), k);
      for (double v : cond) EXPECT_LE(std::fabs(v), 1e-12);
    }
  }
}

TEST(Decompose, IdempotentAndLinear) {
  const auto a = construct(7);
  const Decomposition d = decompose(a.space, a.m);
  const Decomposition dd = decompose(a.space, d.martingale);
  EXPECT_LE(dd.martingale.max_abs_difference(d.martingale), 1e-12);
  const FiniteProcess other = a.k * 0.5;
  const Decomposition lin = decompose(a.space, a.m * 2.0 + other * -3.0);
  const Decomposition d2 = decompose(a.space, other);
  EXPECT_LE(lin.martingale.max_abs_difference(d.martingale * 2.0 + d2.martingale * -3.0), 1e-12);
  EXPECT_LE(lin.remainder.max_abs_difference(d.remainder * 2.0 + d2.remainder * -3.0), 1e-12);
}

TEST(Decompose, RejectsNonIncrementMartingale) {
  const auto space = fair_tree(4);
  EXPECT_THROW(decompose(space, walk(space, 4, 0.2)), ArgumentError);
}

TEST(Stop, SpecExamples) {
  const auto space = fair_tree(6);
  const FiniteProcess x = walk(space, 6);
  const auto never = FiniteStoppingTime::constant(space, std::nullopt);
  EXPECT_EQ(stop(space, x, never).max_abs_difference(x), 0.0);
  const auto first = FiniteStoppingTime::constant(space, 0);
  const FiniteProcess frozen = stop(space, x, first);
  for (std::size_t k = 0; k < 7; ++k) {
    for (std::size_t w = 0; w < space.outcomes(); ++w) EXPECT_EQ(frozen.at(k, w), x.at(0, w));
  }
  const auto hit = FiniteStoppingTime::first_hit(space, x, 2.0);
  EXPECT_TRUE(is_martingale(space, stop(space, x, hit)).holds);
}

TEST(Stop, IncrementAfterStoppingTimeIsIncrementMartingale) {
  const auto c = construct(11);
  const auto tau = FiniteStoppingTime::first_hit(c.space, c.k, 0.7);
  EXPECT_TRUE(check_increment_martingale(c.space, increment_after(c.space, c.m, tau)).holds);
}

TEST(StoppingTime, RejectsPeekingTimes) {
  const auto space = fair_tree(2);
  // Stops at time 0 exactly when the last bit is 1: not F_0-measurable.
  std::vector<std::optional<std::size_t>> idx(space.outcomes());
  for (std::size_t w = 0; w < space.outcomes(); ++w) idx[w] = (w & 1U) ? std::optional<std::size_t>(0) : std::nullopt;
  EXPECT_THROW(FiniteStoppingTime(space, idx), MeasurabilityError);
}

TEST(FiniteSpace, JsonRoundTrip) {
  const auto c = construct(2);
  const auto space = FiniteFilteredSpace::from_json(nlohmann::json::parse(c.space.to_json().dump()));
  EXPECT_EQ(space.outcomes(), c.space.outcomes());
  EXPECT_EQ(space.block_ids(), c.space.block_ids());
  const auto m = FiniteProcess::from_json(nlohmann::json::parse(c.m.to_json().dump()));
  EXPECT_EQ(m.max_abs_difference(c.m), 0.0);
}
