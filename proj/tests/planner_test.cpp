#include <gtest/gtest.h>

#include <random>

#include "ans/planner.hpp"
#include "ans/verify/oracles.hpp"

using namespace ans;

namespace {

Mask open_mask(int rows, int cols) { return Mask(rows, cols, 1); }

}  // namespace

TEST(Fmm, ZeroAtSourceInfiniteWhenSealed) {
  Mask m = open_mask(30, 30);
  // Ring of obstacles around (5, 5).
  for (int i = 3; i <= 7; ++i) m(3, i) = m(7, i) = m(i, 3) = m(i, 7) = 0;
  const DistanceField f = fmm(m, {20, 20});
  EXPECT_EQ(f.at({20, 20}), 0.0);
  EXPECT_EQ(f.at({5, 5}), kInf);
  EXPECT_LT(f.at({0, 0}), kInf);
}

TEST(Fmm, OpenFieldWithinTwoPercentOfEuclid) {
  const DistanceField f = fmm(open_mask(200, 200), {100, 60});
  const Cell target{100, 100};  // 2 m away
  const double t = f.at(target);
  EXPECT_NEAR(t, 2.0, 0.02 * 2.0);
  std::mt19937_64 g(3);
  for (int k = 0; k < 200; ++k) {
    const Cell c{static_cast<int>(g() % 200), static_cast<int>(g() % 200)};
    const double e = kCellSize * std::hypot(c.row - 100, c.col - 60);
    if (e < 0.5) continue;
    EXPECT_GE(f.at(c), e * (1.0 - 1e-9));
    EXPECT_LE(f.at(c), e * 1.02);
  }
}

TEST(Fmm, SandwichedBetweenEuclidAndDijkstra) {
  std::mt19937_64 g(4);
  Mask m = open_mask(80, 80);
  std::bernoulli_distribution block(0.15);
  for (int r = 0; r < 80; ++r) {
    for (int c = 0; c < 80; ++c) m(r, c) = block(g) ? 0 : 1;
  }
  const Cell src{40, 40};
  m[src] = 1;
  const DistanceField f = fmm(m, src);
  const Grid<double> d8 = verify::dijkstra8(m, src, kCellSize);
  for (int r = 0; r < 80; ++r) {
    for (int c = 0; c < 80; ++c) {
      if (!m(r, c)) continue;
      const double t = f.at({r, c});
      if (!(d8(r, c) < kInf)) continue;
      const double e = kCellSize * std::hypot(r - src.row, c - src.col);
      EXPECT_GE(t, e * (1.0 - 1e-9)) << r << "," << c;
      EXPECT_LE(t, d8(r, c) * (1.0 + 1e-9)) << r << "," << c;
    }
  }
}

TEST(ExtractPath, StartAtGoal) {
  const DistanceField f = fmm(open_mask(20, 20), {10, 10});
  const PlanResult p = extract_path(f, {10, 10});
  EXPECT_TRUE(p.reachable);
  EXPECT_EQ(p.short_term_goal, (Cell{10, 10}));
  EXPECT_EQ(p.path.size(), 1U);
}

TEST(ExtractPath, CorridorShortTermGoalFiveCellsAhead) {
  Mask m(5, 60, 0);
  for (int c = 1; c < 59; ++c) m(2, c) = 1;
  const DistanceField f = fmm(m, {2, 55});
  const PlanResult p = extract_path(f, {2, 5});
  ASSERT_TRUE(p.reachable);
  EXPECT_EQ(p.short_term_goal, (Cell{2, 10}));
  EXPECT_EQ(p.path.back(), (Cell{2, 55}));
  EXPECT_NEAR(p.length, 50 * kCellSize, 1e-9);
}

TEST(ExtractPath, UnreachableStart) {
  Mask m = open_mask(20, 20);
  for (int r = 0; r < 20; ++r) m(r, 10) = 0;
  const DistanceField f = fmm(m, {5, 2});
  const PlanResult p = extract_path(f, {5, 15});
  EXPECT_FALSE(p.reachable);
  EXPECT_EQ(p.short_term_goal, (Cell{5, 15}));
}

TEST(ExtractPath, TravelTimeStrictlyDecreases) {
  std::mt19937_64 g(5);
  std::bernoulli_distribution block(0.2);
  for (int trial = 0; trial < 10; ++trial) {
    Mask m = open_mask(60, 60);
    for (int r = 0; r < 60; ++r) {
      for (int c = 0; c < 60; ++c) m(r, c) = block(g) ? 0 : 1;
    }
    const Cell goal{30, 30};
    m[goal] = 1;
    const DistanceField f = fmm(m, goal);
    for (int k = 0; k < 20; ++k) {
      const Cell s{static_cast<int>(g() % 60), static_cast<int>(g() % 60)};
      const PlanResult p = extract_path(f, s);
      if (!p.reachable) continue;
      EXPECT_EQ(p.path.back(), goal);
      for (std::size_t i = 1; i < p.path.size(); ++i) {
        EXPECT_LT(f.at(p.path[i]), f.at(p.path[i - 1]));
      }
    }
  }
}

TEST(GeodesicDistance, StraightAndAroundAWall) {
  Mask m = open_mask(50, 50);
  EXPECT_NEAR(geodesic_distance(m, {10, 10}, {10, 40}), 1.5, 0.02 * 1.5);
  EXPECT_EQ(geodesic_distance(m, {3, 3}, {3, 3}), 0.0);
  for (int r = 0; r < 40; ++r) m(r, 25) = 0;
  const double around = geodesic_distance(m, {10, 10}, {10, 40});
  // Shortest way passes the wall end at (40, 25).
  const double lower = kCellSize * (std::hypot(30, 15) + std::hypot(30, 15));
  EXPECT_GE(around, lower * 0.99);
  EXPECT_LE(around, lower * 1.05);
  Mask sealed = open_mask(50, 50);
  for (int r = 0; r < 50; ++r) sealed(r, 25) = 0;
  EXPECT_EQ(geodesic_distance(sealed, {10, 10}, {10, 40}), kInf);
  EXPECT_THROW(geodesic_distance(sealed, {-1, 0}, {10, 40}), InvalidArgument);
}
