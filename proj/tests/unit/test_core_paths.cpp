#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "incmart/increments.hpp"
#include "incmart/path_io.hpp"
#include "incmart/process_zoo.hpp"
#include "incmart/rng.hpp"
#include "incmart/time_grid.hpp"

using namespace incmart;

namespace {

GridPtr grid_of(std::vector<double> t) { return make_grid(TimeGrid(std::move(t))); }

SamplePath brownian(double lo, double hi, std::size_t n, std::uint64_t seed) {
  return sample(BrownianR{}, make_grid(TimeGrid::uniform(lo, hi, n)), seed).path;
}

SamplePath levy(double lo, double hi, std::size_t n, std::uint64_t seed) {
  LevyR m;
  m.rate = 3.0;
  return sample(m, make_grid(TimeGrid::uniform(lo, hi, n)), seed).path;
}

template <class T>
bool same_path(const BasicPath<T>& a, const BasicPath<T>& b) {
  if (a.size() != b.size() || a.jumps().size() != b.jumps().size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  for (std::size_t k = 0; k < a.jumps().size(); ++k) {
    if (a.jumps()[k].index != b.jumps()[k].index || a.jumps()[k].size != b.jumps()[k].size) {
      return false;
    }
  }
  return true;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(TimeGrid, RejectsBadTimes) {
  EXPECT_THROW(TimeGrid({0.0}), ArgumentError);
  EXPECT_THROW(TimeGrid({0.0, 0.0}), ArgumentError);
  EXPECT_THROW(TimeGrid({1.0, 0.0}), ArgumentError);
  EXPECT_THROW(TimeGrid({0.0, INFINITY}), ArgumentError);
}

TEST(TimeGrid, UniformAndSnap) {
  const TimeGrid g = TimeGrid::uniform(-1.0, 1.0, 4);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[2], 0.0);
  EXPECT_EQ(g.snap(0.2), 2u);
  EXPECT_EQ(g.snap(0.25), 2u);  // ties go to the earlier time
  EXPECT_EQ(g.snap(0.26), 3u);
  EXPECT_EQ(g.anchor_index(), 2u);
  EXPECT_THROW(g.snap(1.5), RangeError);
  EXPECT_THROW(g.snap(-1.0001), RangeError);
  EXPECT_EQ(g.index_at_or_before(0.49), 2u);
}

TEST(TimeGrid, AnchorFallsBackToStart) {
  EXPECT_EQ(TimeGrid::uniform(1.0, 2.0, 4).anchor_index(), 0u);
}

TEST(TimeGrid, LogTailIsFineNearEndAndCoarseAtStart) {
  const TimeGrid g = TimeGrid::log_tail(-200.0, 0.0, 8000);
  ASSERT_EQ(g.size(), 8001u);
  EXPECT_DOUBLE_EQ(g.t_min(), -200.0);
  EXPECT_DOUBLE_EQ(g.t_max(), 0.0);
  EXPECT_GT(g.width(1), 100.0 * g.width(g.cells()));
  for (std::size_t i = 1; i < g.size(); ++i) ASSERT_GT(g[i], g[i - 1]);
}

TEST(SamplePath, Invariants) {
  const GridPtr g = grid_of({0, 1, 2});
  EXPECT_THROW(SamplePath(g, {0, 1}), ArgumentError);
  EXPECT_THROW(SamplePath(g, {0, 1, 2}, {{0, 1.0}}), ArgumentError);
  EXPECT_THROW(SamplePath(g, {0, 1, 2}, {{1, 1.0}, {1, 2.0}}), ArgumentError);
  EXPECT_THROW(SamplePath(g, {0, 1, 2}, {{1, 1.0}}, Interpolation::linear_continuous),
               ArgumentError);
  const SamplePath p(g, {0, 1, 3}, {{2, 1.5}});
  EXPECT_EQ(p.left_limit(2), 1.5);
  EXPECT_EQ(p.left_limit(1), 1.0);
}

TEST(PathPrefix, RefusesToReadAhead) {
  const SamplePath p(grid_of({0, 1, 2}), {5, 6, 7});
  const PathPrefix view(p, 1);
  EXPECT_EQ(view.current(), 6.0);
  EXPECT_EQ(view.values().size(), 2u);
  EXPECT_THROW(view.value(2), ContractViolation);
}

TEST(Increment, SpecExample) {
  const SamplePath p(grid_of({0, 1, 2}), {1, 3, 6});
  const SamplePath i = increment(p, 0.0);
  EXPECT_EQ(std::vector<double>(i.values().begin(), i.values().end()),
            (std::vector<double>{0, 2, 5}));
  EXPECT_EQ(increment_over(p, 0.0, 2.0), 5.0);
  EXPECT_EQ(increment_over(p, 2.0, 2.0), 0.0);
  EXPECT_THROW(increment_over(p, 2.0, 1.0), ArgumentError);
  EXPECT_THROW(increment(p, 3.5), RangeError);
}

TEST(Increment, AtTmaxIsZero) {
  const SamplePath p = levy(-5, 5, 200, 3);
  const SamplePath i = increment(p, p.grid().size() - 1);
  for (double v : i.values()) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(i.jumps().empty());
}

TEST(Increment, MatchesScalarRecomputation) {
  const SamplePath p = brownian(-10, 10, 1000, 11);
  const SamplePath i = increment(p, -10.0);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(i[k], k == 0 ? 0.0 : p[k] - p[0]);
}

TEST(Increment, ZeroUpToAnchor) {
  const SamplePath p = levy(-5, 5, 200, 4);
  const SamplePath i = increment(p, std::size_t{77});
  for (std::size_t k = 0; k <= 77; ++k) EXPECT_EQ(i[k], 0.0);
}

TEST(Increment, DropsEarlyJumps) {
  const SamplePath p(grid_of({0, 1, 2, 3}), {0, 1, 1, 3}, {{1, 1.0}, {3, 2.0}});
  const SamplePath i = increment(p, std::size_t{1});
  ASSERT_EQ(i.jumps().size(), 1u);
  EXPECT_EQ(i.jumps()[0].index, 3u);
}

TEST(Increment, AdditivitySpotValue) {
  const ExactPath m = to_exact(brownian(-5, 5, 1000, 8));
  EXPECT_EQ(increment_over(m, -1.0, 0.0) + increment_over(m, 0.0, 2.0), increment_over(m, -1.0, 2.0));
}

TEST(Increment, PropertiesHoldExactlyOnRandomPaths) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ExactPath m = to_exact(levy(-3, 3, 300, seed));
    Rng rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, m.size() - 1);
    std::size_t idx[3] = {pick(rng), pick(rng), pick(rng)};
    std::sort(idx, idx + 3);
    const Exact lhs = increment_over(m, idx[0], idx[1]) + increment_over(m, idx[1], idx[2]);
    EXPECT_EQ(lhs, increment_over(m, idx[0], idx[2]));
    EXPECT_TRUE(same_path(increment(increment(m, idx[0]), idx[1]), increment(m, idx[1])));
    const GridStop sigma = idx[2];
    EXPECT_TRUE(same_path(stop(increment(m, idx[0]), sigma), increment(stop(m, sigma), idx[0])));
    EXPECT_TRUE(same_path(stop(increment(m, idx[1]), GridStop{}), increment(m, idx[1])));
  }
}

TEST(Stop, FreezesValuesAndDropsLaterJumps) {
  const SamplePath p(grid_of({0, 1, 2, 3}), {0, 1, 4, 9}, {{1, 1.0}, {3, 5.0}});
  const SamplePath s = stop(p, GridStop{2});
  EXPECT_EQ(s[3], 4.0);
  ASSERT_EQ(s.jumps().size(), 1u);
  EXPECT_TRUE(same_path(stop(p, GridStop{}), p));
}

TEST(Associate, SpecExamples) {
  const GridPtr g = grid_of({-1, 0, 1});
  const SamplePath a = associate(IncrementFamily<double>(g, {2.0, 3.0}));
  EXPECT_EQ(std::vector<double>(a.values().begin(), a.values().end()),
            (std::vector<double>{-2, 0, 3}));
  const SamplePath z = associate(IncrementFamily<double>(g, {0.0, 0.0}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
}

TEST(Associate, RoundTripsUpToAConstant) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SamplePath p = levy(-4, 6, 400, seed);
    const SamplePath a = associate(increments_of(p));
    const double shift = a[0] - p[0];
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::fabs(a[i] - p[i] - shift));
    EXPECT_LE(worst, 1e-12);
    const ExactPath m = to_exact(p);
    const auto family = increments_of(m);
    const auto again = increments_of(associate(family));
    ASSERT_EQ(again.cells().size(), family.cells().size());
    for (std::size_t i = 0; i < family.cells().size(); ++i) EXPECT_EQ(again.cells()[i], family.cells()[i]);
  }
}

TEST(CheckConsistency, FamiliesFromPathsAndCells) {
  const SamplePath p = levy(-5, 5, 100, 2);
  const GridPtr g = p.grid_ptr();
  const std::vector<TimeTriple> probes{{-5, -1, 3}, {-2, -2, 4}, {0, 1, 5}};
  const auto from_path = check_consistency<double>(
      [&](double s) { return increment(p, s); }, g, probes, 0.0);
  EXPECT_TRUE(from_path.passed);
  EXPECT_EQ(from_path.max_defect, 0.0);
  const auto family = increments_of(p);
  const auto from_cells = check_consistency<double>(
      [&](double s) { return family.member(g->snap(s)); }, g, probes, 1e-12);
  EXPECT_TRUE(from_cells.passed);
}

TEST(CheckConsistency, DetectsCorruption) {
  const SamplePath p = brownian(-5, 5, 100, 2);
  const GridPtr g = p.grid_ptr();
  const std::size_t bad = g->snap(-1.0);
  auto corrupted = [&](double s) {
    SamplePath m = increment(p, s);
    if (g->snap(s) != bad) return m;
    std::vector<double> v(m.values().begin(), m.values().end());
    for (std::size_t i = g->snap(2.0); i < v.size(); ++i) v[i] += 0.1;  // one cell shifted
    return SamplePath(g, std::move(v), {}, m.interpolation());
  };
  const auto r = check_consistency<double>(corrupted, g, {{-1, 0, 3}}, 1e-12);
  EXPECT_FALSE(r.passed);
  EXPECT_GE(r.max_defect, 0.1 - 1e-12);
}

TEST(CheckConsistency, GridMismatch) {
  const SamplePath p = brownian(-5, 5, 100, 2);
  const SamplePath other = brownian(-5, 5, 50, 2);
  EXPECT_THROW(check_consistency<double>([&](double) { return other; }, p.grid_ptr(),
                                         {{-1, 0, 1}}, 0.0),
               GridMismatchError);
}

TEST(AnchorAtMinusInfinity, ConstantTail) {
  std::vector<double> v(100, 2.5);
  for (std::size_t i = 50; i < v.size(); ++i) v[i] = 2.5 + 0.01 * static_cast<double>(i);
  const TailAnchor a = anchor_at_minus_infinity(SamplePath(make_grid(TimeGrid::uniform(-10, 0, 99)), v), 10);
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(a.limit, 2.5);
  EXPECT_EQ(a.path[0], 0.0);
  EXPECT_EQ(a.path[10], 0.0);
}

TEST(AnchorAtMinusInfinity, BumpTailIsZero) {
  Bump b;
  b.a = -10;
  b.b = -5;
  const SamplePath p = sample(b, make_grid(TimeGrid::uniform(-40, 0, 4000)), 5).path;
  const TailAnchor a = anchor_at_minus_infinity(p, 400);
  EXPECT_TRUE(a.converged);
  EXPECT_EQ(a.limit, 0.0);
}

TEST(AnchorAtMinusInfinity, OuTailIsNotClaimedConvergent) {
  const GridPtr g = make_grid(TimeGrid::uniform(-40, 0, 400));
  int flagged = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const SamplePath p = sample(MovingAverage{}, g, seed).path;
    flagged += anchor_at_minus_infinity(p, 40).converged;
  }
  EXPECT_LE(flagged, 10);  // at most 5%
}

TEST(PathIo, RoundTripsBitExactly) {
  const SamplePath p = levy(-3, 2, 250, 9);
  const SamplePath q = path_from_csv(to_csv(p));
  ASSERT_EQ(q.size(), p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(q[i], p[i]);
    EXPECT_EQ(q.grid()[i], p.grid()[i]);
    EXPECT_EQ(q.jump_at(i), p.jump_at(i));
  }
  const SamplePath b = brownian(0, 1, 10, 1);
  EXPECT_TRUE(path_from_csv(to_csv(b)).continuous());
}

TEST(PathIo, RejectsMalformedCsv) {
  EXPECT_THROW(path_from_csv("time,value\n0,1\n1,2\n"), ArgumentError);
  EXPECT_THROW(path_from_csv("time,value,jump\n0,1,0\n1,x,0\n"), ArgumentError);
}

TEST(PathIo, GoldenCsv) {
  const SamplePath p(grid_of({-1, -0.5, 0, 0.5}), {0.1, 0.30000000000000004, -2, 1.0 / 3.0},
                     {{2, -2.25}});
  EXPECT_EQ(to_csv(p), slurp(std::string(INCMART_GOLDEN_DIR) + "/path.csv"));
}

TEST(Rng, SeedsAreDistinctAndStable) {
  std::vector<std::uint64_t> s;
  for (std::uint64_t i = 0; i < 1000; ++i) s.push_back(derive_seed(42, i));
  std::sort(s.begin(), s.end());
  EXPECT_EQ(std::unique(s.begin(), s.end()), s.end());
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
}
