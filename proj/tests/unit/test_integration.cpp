#include <gtest/gtest.h>

#include <cmath>

#include "incmart/errors.hpp"
#include "incmart/integration.hpp"
#include "incmart/stats_mc.hpp"

using namespace incmart;

TEST(Integrand, ParsesForms) {
  EXPECT_DOUBLE_EQ(Integrand::parse("exp(0.5)")(2.0), std::exp(1.0));
  EXPECT_DOUBLE_EQ(Integrand::parse("const(-2)")(7.0), -2.0);
  EXPECT_DOUBLE_EQ(Integrand::parse(" poly(3) ")(2.0), 8.0);
  const Integrand ind = Integrand::parse("indicator(0,1)");
  EXPECT_EQ(ind(0.0), 1.0);
  EXPECT_EQ(ind(0.999), 1.0);
  EXPECT_EQ(ind(1.0), 0.0);
  EXPECT_EQ(ind(-0.1), 0.0);
  EXPECT_EQ(Integrand::parse("exp(1)").name(), "exp(1)");
  for (const char* bad : {"exp", "exp()", "exp(a)", "poly(1.5)", "indicator(1,0)", "sin(1)",
                          "const(1,2)", "exp(1e999)"}) {
    EXPECT_THROW(Integrand::parse(bad), ConfigurationError) << bad;
  }
}

TEST(IncrementIntegral, ConstantOneGivesIncrement) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-5, 5, 500));
  const SamplePath m = sample(LevyR{0.0, 1.0, 2.0}, grid, 3).path;
  const std::size_t s = grid->snap(-1.0);
  const SamplePath i = increment_integral(Integrand::parse("const(1)"), m, s);
  const SamplePath inc = increment(m, s);
  for (std::size_t k = 0; k < grid->size(); ++k) EXPECT_NEAR(i[k], inc[k], 1e-12);
  ASSERT_EQ(i.jumps().size(), inc.jumps().size());
  const SamplePath zero = increment_integral(Integrand::parse("const(0)"), m, -1.0);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
}

TEST(IncrementIntegral, RiemannSumAgainstTime) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, 1000));
  std::vector<double> t(grid->times().begin(), grid->times().end());
  const SamplePath m(grid, t, {}, Interpolation::linear_continuous);
  const SamplePath i = increment_integral(Integrand::parse("poly(1)"), m, std::size_t{0});
  EXPECT_NEAR(i[grid->size() - 1], 0.5, 1e-3);
}

TEST(IncrementIntegral, FunctionalSeesOnlyThePast) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, 10));
  const SamplePath m = sample(BrownianR{}, grid, 1).path;
  const Integrand peek = Integrand::functional(
      [](const PathPrefix& p, double) { return p.value(p.last_index() + 1); });
  EXPECT_THROW(increment_integral(peek, m, std::size_t{0}), ContractViolation);
  const Integrand current =
      Integrand::functional([](const PathPrefix& p, double) { return p.current(); });
  const SamplePath i = increment_integral(current, m, std::size_t{0});
  double expect = 0.0;
  for (std::size_t k = 1; k < grid->size(); ++k) expect += m[k - 1] * (m[k] - m[k - 1]);
  EXPECT_NEAR(i[grid->size() - 1], expect, 1e-12);
  EXPECT_THROW(current(0.5), ArgumentError);
}

TEST(ImproperIntegral, ZeroIntegrator) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-50, 0, 500));
  const SamplePath zero(grid, std::vector<double>(grid->size(), 0.0));
  const IntegralReport r = improper_integral(Integrand::parse("exp(1)"), zero);
  EXPECT_TRUE(r.converged);
  ASSERT_TRUE(r.improper_value.has_value());
  EXPECT_EQ(*r.improper_value, 0.0);
  EXPECT_EQ(r.verdict, IntegrandClass::LL1);
  EXPECT_TRUE(r.consistent);
}

TEST(ImproperIntegral, ExpWeightOnBrownianConverges) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-40, 0, 4000));
  const Ensemble e = run_ensemble(BrownianR{}, grid, 400, 2);
  std::vector<double> values;
  for (const auto& p : e.paths()) {
    const IntegralReport r = improper_integral(Integrand::parse("exp(1)"), p);
    EXPECT_EQ(r.verdict, IntegrandClass::LL1);
    ASSERT_TRUE(r.converged);
    values.push_back(*r.improper_value);
  }
  // Variance of the limit is the integral of e^{2u} over (-inf, 0], i.e. 1/2.
  double m = 0.0, v = 0.0;
  for (double x : values) m += x;
  m /= static_cast<double>(values.size());
  for (double x : values) v += (x - m) * (x - m);
  v /= static_cast<double>(values.size() - 1);
  EXPECT_NEAR(v, 0.5, 0.1);
}

TEST(Ll1, Classification) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-40, 0, 4000));
  const SamplePath b = sample(BrownianR{}, grid, 5).path;
  const QVReport qv = realized_qv(b);
  EXPECT_EQ(ll1_classify(Integrand::parse("exp(1)"), qv).verdict, IntegrandClass::LL1);
  EXPECT_EQ(ll1_classify(Integrand::parse("const(1)"), qv).verdict, IntegrandClass::ILL1_only);
  const SamplePath bump = sample(Bump{-10, -5, 1, 1e3}, grid, 5).path;
  EXPECT_EQ(ll1_classify(Integrand::parse("const(1)"), realized_qv(bump)).verdict,
            IntegrandClass::LL1);
  EXPECT_EQ(ll1_classify(Integrand::parse("exp(-100)"), qv).verdict, IntegrandClass::neither);
  const GridPtr other = make_grid(TimeGrid::uniform(-40, 0, 400));
  const SamplePath elsewhere = sample(BrownianR{}, other, 5).path;
  const Integrand f = Integrand::functional([](const PathPrefix& p, double) { return p.current(); });
  EXPECT_THROW(ll1_classify(f, qv, elsewhere), GridMismatchError);
  EXPECT_EQ(to_string(IntegrandClass::ILL1_only), "ILL1_only");
}

TEST(IntegralProperties, HoldExactly) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-5, 5, 300));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SamplePath m = sample(LevyR{0.0, 1.0, 2.0}, grid, seed).path;
    const Integrand psi = Integrand::functional(
        [](const PathPrefix& p, double) { return 1.0 / (1.0 + p.current() * p.current()); });
    const PropertyReport r = verify_integral_properties(
        Integrand::parse("exp(0.5)"), psi, m, canonical_localizer(m, 0.0, 1.0), grid->snap(-1.0));
    EXPECT_TRUE(r.passed) << to_json(r).dump();
    EXPECT_EQ(r.jumps_checked, m.jumps().size());
  }
}

TEST(TimeChange, ConstantVolatilityRecoversDriver) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 5, 500));
  const SamplePath b = sample(BrownianR{}, grid, 6).path;
  std::vector<double> doubled(b.values().begin(), b.values().end());
  for (double& v : doubled) v *= 2.0;
  const SamplePath x(grid, doubled, {}, Interpolation::linear_continuous);
  const SamplePath back = time_change_by_vol(x, [](double) { return 2.0; });
  const SamplePath back_sq = time_change_to_bm(x, [](double) { return 4.0; });
  for (std::size_t i = 0; i < grid->size(); ++i) {
    EXPECT_NEAR(back[i], b[i] - b[0], 1e-12);
    EXPECT_NEAR(back_sq[i], b[i] - b[0], 1e-12);
  }
  EXPECT_THROW(time_change_by_vol(x, [](double) { return 0.0; }), ArgumentError);
  const SamplePath jumpy = sample(LevyR{0.0, 1.0, 2.0}, grid, 1).path;
  if (!jumpy.jumps().empty()) {
    EXPECT_THROW(time_change_by_vol(jumpy, [](double) { return 1.0; }), ArgumentError);
  }
}
