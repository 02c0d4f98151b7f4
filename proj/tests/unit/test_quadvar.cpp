#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "incmart/errors.hpp"
#include "incmart/quadvar.hpp"
#include "incmart/stats_mc.hpp"

using namespace incmart;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

SamplePath from_function(const GridPtr& grid, double (*f)(double)) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
  return SamplePath(grid, std::move(v), {}, Interpolation::linear_continuous);
}

}  // namespace

TEST(TailCriterion, WindowAndVerdicts) {
  EXPECT_EQ(tail_window_size(5), 2U);
  EXPECT_EQ(tail_window_size(100), 10U);
  EXPECT_EQ(tail_window_size(101), 11U);
  std::vector<double> flat_then_move(100, 1.0);
  for (std::size_t i = 50; i < 100; ++i) flat_then_move[i] = static_cast<double>(i);
  EXPECT_EQ(tail_verdict(flat_then_move), TailVerdict::converges);
  std::vector<double> ramp(100);
  for (std::size_t i = 0; i < 100; ++i) ramp[i] = -static_cast<double>(100 - i);
  EXPECT_EQ(tail_verdict(ramp), TailVerdict::diverges);
  EXPECT_EQ(tail_verdict(std::vector<double>{1.0, 2.0}), TailVerdict::inconclusive);
  EXPECT_EQ(tail_verdict(std::vector<double>{1.0, NAN, 2.0, 3.0}), TailVerdict::inconclusive);
}

TEST(RealizedQv, SmoothPathHasVanishingQv) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, 10000));
  const QVReport r = realized_qv(from_function(grid, [](double t) { return t * t; }));
  EXPECT_LE(r.qv[r.qv.size() - 1], 4e-4);
  EXPECT_TRUE(r.qv.jumps().empty());
}

TEST(RealizedQv, SingleUnitJump) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 4, 4));
  const SamplePath m(grid, {0, 0, 1, 1, 1}, {{2, 1.0}});
  const QVReport r = realized_qv(m);
  EXPECT_EQ(r.qv[4], 1.0);
  EXPECT_EQ(r.jump_sum[4], 1.0);
  EXPECT_EQ(r.continuous[4], 0.0);
  EXPECT_EQ(r.qv.jump_at(2), 1.0);
  EXPECT_EQ(r.clamp_defect, 0.0);
}

TEST(RealizedQv, BrownianQvIsElapsedTime) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, 16384));
  const Ensemble e = run_ensemble(BrownianR{}, grid, 64, 3);
  double mean = 0.0;
  for (const auto& p : e.paths()) mean += realized_qv(p).qv[grid->size() - 1];
  EXPECT_NEAR(mean / 64.0, 1.0, 0.01);
}

TEST(RealizedQv, Additivity) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-5, 5, 500));
  const SamplePath m = sample(LevyR{0.0, 1.0, 2.0}, grid, 8).path;
  const std::size_t s = grid->snap(-2.0), u = grid->snap(1.0);
  const QVReport from_start = realized_qv(m, std::size_t{0});
  const QVReport from_s = realized_qv(m, s);
  for (std::size_t i = u; i < grid->size(); ++i) {
    // [M]_{t_min, t} = [M]_{t_min, s} + [M]_{s, t}
    EXPECT_NEAR(from_start.qv[i], from_start.qv[s] + from_s.qv[i], 1e-10);
  }
  for (std::size_t i = 0; i <= s; ++i) EXPECT_EQ(from_s.qv[i], 0.0);
}

TEST(RealizedQv, StoppingIdentitiesHoldExactly) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-5, 5, 300));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SamplePath m = sample(LevyR{0.0, 1.0, 2.0}, grid, seed).path;
    for (GridStop sigma : {GridStop{}, GridStop{0}, GridStop{150}, GridStop{299}}) {
      const StoppingIdentityReport r = qv_stopping_identity_check(m, sigma, 40);
      EXPECT_TRUE(r.passed);
      EXPECT_EQ(r.stopped_qv_defect, 0.0);
      EXPECT_EQ(r.increment_qv_defect, 0.0);
    }
  }
}

TEST(RealizedQv, TailVerdictOnBump) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-40, 0, 4000));
  const QVReport r = realized_qv(sample(Bump{-10, -5, 1, 1e3}, grid, 2).path);
  EXPECT_EQ(r.tail, TailVerdict::converges);
}

TEST(RealizedQv, RejectsStartOutsideGrid) {
  const GridPtr grid = make_grid(TimeGrid::uniform(0, 1, 4));
  const SamplePath m(grid, {0, 1, 2, 3, 4});
  EXPECT_THROW(realized_qv(m, std::size_t{5}), RangeError);
}

TEST(RealizedQv, HazardPredictableQvIsCompensator) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-10, 5, 150));
  const PathBundle b = sample(HazardPair{}, grid, 4);
  const SamplePath a = predictable_qv_hazard(b);
  for (std::size_t i = 0; i < grid->size(); ++i) EXPECT_EQ(a[i], (*b.compensator)[i]);
  EXPECT_THROW(predictable_qv_hazard(sample(BrownianR{}, grid, 1)), ArgumentError);
}

TEST(RealizedQv, GoldenCsv) {
  const GridPtr grid = make_grid(TimeGrid({-1, -0.5, 0, 0.5, 2}));
  const SamplePath m(grid, {0.25, -0.5, 1.5, 1.0, 0.0}, {{2, 1.75}});
  std::ostringstream out;
  write_csv(out, realized_qv(m));
  EXPECT_EQ(out.str(), slurp(std::string(INCMART_GOLDEN_DIR) + "/qv.csv"));
}

TEST(ConvergenceVsQv, DiagonalForBrownianAndBump) {
  const GridPtr grid = make_grid(TimeGrid::uniform(-50, 0, 5000));
  const Ensemble bm = run_ensemble(BrownianR{}, grid, 200, 1);
  const auto bm_paths = bm.paths();
  const ContingencyReport r = convergence_vs_qv_verdict(bm_paths, "brownian_r");
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.counts[0][0] + r.counts[1][1] + r.counts[0][1] + r.counts[1][0] + r.inconclusive,
            200U);
  const Ensemble bump = run_ensemble(Bump{-30, -20, 1, 1e3}, grid, 200, 1);
  const auto bump_paths = bump.paths();
  const ContingencyReport b = convergence_vs_qv_verdict(bump_paths, "bump");
  EXPECT_TRUE(b.passed);
  EXPECT_GE(b.counts[1][1], 190U);
}
