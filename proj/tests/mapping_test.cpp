#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ans/mapping.hpp"
#include "ans/world.hpp"

using namespace ans;

namespace {

RangeScan single_ray(double range, bool hit) {
  RangeScan s;
  s.bearings = {0.0};
  s.ranges = {range};
  s.hits = {static_cast<std::uint8_t>(hit)};
  return s;
}

Occupancy box(int n) {
  Occupancy o(n, n, 1);
  for (int r = 1; r < n - 1; ++r) {
    for (int c = 1; c < n - 1; ++c) o(r, c) = 0;
  }
  return o;
}

EgoMap random_ego(std::mt19937_64& g) {
  EgoMap e = make_ego();
  std::bernoulli_distribution on(0.2);
  for (int r = 0; r < kEgoSize; ++r) {
    for (int c = 0; c < kEgoSize; ++c) {
      if (!on(g)) continue;
      e.at(kExploredChannel, r, c) = 1.0F;
      if (on(g)) e.at(kObstacleChannel, r, c) = 1.0F;
    }
  }
  return e;
}

}  // namespace

TEST(ProjectEgo, SingleRayHitAtOneMetre) {
  const EgoMap e = project_ego(single_ray(1.0, true));
  const int col = kEgoSize / 2;
  for (int k = 0; k <= 20; ++k) EXPECT_EQ(e.at(kExploredChannel, kEgoSize - 1 - k, col), 1.0F) << k;
  EXPECT_EQ(e.at(kExploredChannel, kEgoSize - 1 - 21, col), 0.0F);
  EXPECT_EQ(e.at(kObstacleChannel, kEgoSize - 1 - 20, col), 1.0F);
  int obstacles = 0;
  for (float v : e.channel(kObstacleChannel)) obstacles += v > 0.0F;
  EXPECT_EQ(obstacles, 1);
}

TEST(ProjectEgo, NoHitsGiveNoObstacles) {
  RangeScan s;
  for (int i = 0; i < 128; ++i) {
    s.bearings.push_back(-kPi / 4 + i * (kPi / 2) / 127);
    s.ranges.push_back(1.5);
    s.hits.push_back(0);
  }
  const EgoMap e = project_ego(s);
  for (float v : e.channel(kObstacleChannel)) EXPECT_EQ(v, 0.0F);
  double explored = 0.0;
  for (float v : e.channel(kExploredChannel)) explored += v;
  // Quarter disc of radius 1.5 m; it fits inside the 3.2 m x 3.2 m grid.
  EXPECT_NEAR(explored * kCellArea, kPi * 1.5 * 1.5 / 4.0, 0.2);
}

TEST(ProjectEgo, ObstacleImpliesExplored) {
  WorldParams p;
  p.min_area_m2 = 16.0;
  p.max_area_m2 = 36.0;
  GridWorld w = generate_world(2, p);
  for (int r = 0; r < w.rows(); r += 7) {
    for (int c = 0; c < w.cols(); c += 7) {
      if (w.occupancy()(r, c)) continue;
      const EgoMap e = project_ego(cast_scan(w, w.cell_center({r, c}, 0.3), ScanParams{}));
      for (int i = 0; i < kEgoSize; ++i) {
        for (int j = 0; j < kEgoSize; ++j) {
          if (e.at(kObstacleChannel, i, j) > 0.0F) EXPECT_EQ(e.at(kExploredChannel, i, j), 1.0F);
        }
      }
    }
  }
}

TEST(ProjectEgo, EmptyScanFails) {
  EXPECT_THROW(project_ego(RangeScan{}), InvalidArgument);
}

TEST(Aggregate, ZeroEgoLeavesZeroMap) {
  const SpatialMap m(120);
  const SpatialMap out = aggregate(m, make_ego(), {3.0, 3.0, 0.7});
  EXPECT_TRUE(out == m);
}

TEST(Aggregate, MonotoneAndIdempotent) {
  std::mt19937_64 g(1);
  SpatialMap m(240);
  std::uniform_real_distribution<double> u(4.0, 8.0), th(-kPi, kPi);
  for (int i = 0; i < 10; ++i) {
    const EgoMap e = random_ego(g);
    const Pose p{u(g), u(g), th(g)};
    const SpatialMap next = aggregate(m, e, p);
    const auto a = m.grid().values();
    const auto b = next.grid().values();
    for (std::size_t k = 0; k < a.size(); ++k) ASSERT_GE(b[k], a[k]);
    EXPECT_TRUE(aggregate(next, e, p) == next);
    m = next;
  }
}

TEST(Aggregate, OrderDoesNotMatter) {
  std::mt19937_64 g(2);
  std::vector<std::pair<EgoMap, Pose>> views;
  std::uniform_real_distribution<double> u(4.0, 8.0), th(-kPi, kPi);
  for (int i = 0; i < 5; ++i) views.push_back({random_ego(g), {u(g), u(g), th(g)}});
  auto build = [&](const std::vector<int>& order) {
    SpatialMap m(240);
    for (int i : order) aggregate_into(m, views[i].first, views[i].second);
    return m;
  };
  std::vector<int> order{0, 1, 2, 3, 4};
  const SpatialMap ref = build(order);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(order.begin(), order.end(), g);
    EXPECT_TRUE(build(order) == ref);
  }
}

TEST(Aggregate, SameWallFromTwoPosesCoincides) {
  GridWorld w(box(200));
  // Wall at x = 9.95 m; two views 0.5 m apart along the heading.
  const Pose a{7.5, 5.0, 0.0}, b{8.0, 5.0, 0.0};
  SpatialMap ma(480), mb(480);
  // Map frame = world frame shifted so both fit.
  aggregate_into(ma, project_ego(cast_scan(w, a, ScanParams{})), a);
  aggregate_into(mb, project_ego(cast_scan(w, b, ScanParams{})), b);
  auto wall_cols = [](const SpatialMap& m, int row) {
    std::vector<int> cols;
    for (int c = 0; c < m.size(); ++c) {
      if (m.obstacle(row, c) >= 0.5F) cols.push_back(c);
    }
    return cols;
  };
  const int row = ma.cell_of(a).row;
  const auto ca = wall_cols(ma, row);
  const auto cb = wall_cols(mb, row);
  ASSERT_FALSE(ca.empty());
  ASSERT_FALSE(cb.empty());
  EXPECT_LE(std::abs(ca.front() - cb.front()), 1);
}

TEST(Aggregate, NoObstacleFarFromTruth) {
  WorldParams p;
  p.min_area_m2 = 16.0;
  p.max_area_m2 = 36.0;
  GridWorld w = generate_world(9, p);
  std::mt19937_64 g(3);
  SpatialMap m(w.rows());
  int views = 0;
  while (views < 30) {
    const int r = static_cast<int>(g() % w.rows());
    const int c = static_cast<int>(g() % w.cols());
    if (w.occupancy()(r, c)) continue;
    const Pose q = w.cell_center({r, c}, std::uniform_real_distribution<double>(-kPi, kPi)(g));
    // Map cell (r, c) is centred at (c, r) * res, world cell at (c + .5, r + .5) * res.
    aggregate_into(m, project_ego(cast_scan(w, q, ScanParams{})),
                   {q.x - kCellSize / 2, q.y - kCellSize / 2, q.theta});
    ++views;
  }
  for (int r = 0; r < m.size(); ++r) {
    for (int c = 0; c < m.size(); ++c) {
      if (m.obstacle(r, c) < 0.5F || w.occupancy()(r, c)) continue;
      bool near = false;
      for (int dr = -1; dr <= 1 && !near; ++dr) {
        for (int dc = -1; dc <= 1 && !near; ++dc) near = w.is_obstacle(r + dr, c + dc);
      }
      EXPECT_TRUE(near) << r << "," << c;
    }
  }
}

TEST(PredictedCoverage, CountsCells) {
  SpatialMap m(40);
  EXPECT_EQ(predicted_coverage(m).area_m2, 0.0);
  m.grid().at(kExploredChannel, 5, 5) = 1.0F;
  EXPECT_NEAR(predicted_coverage(m).area_m2, 0.0025, 1e-12);
  EXPECT_NEAR(predicted_coverage(m).free_area_m2, 0.0025, 1e-12);
  m.grid().at(kObstacleChannel, 5, 5) = 1.0F;
  EXPECT_NEAR(predicted_coverage(m).free_area_m2, 0.0, 1e-12);
}
