#include <gtest/gtest.h>

#include "ans/episode.hpp"

using namespace ans;

namespace {

// Walled room with an inner L-shaped wall.
GridWorld l_room() {
  Occupancy o(80, 80, 1);
  for (int r = 1; r < 79; ++r) {
    for (int c = 1; c < 79; ++c) o(r, c) = 0;
  }
  for (int r = 1; r < 50; ++r) o(r, 40) = 1;
  for (int c = 40; c < 60; ++c) o(50, c) = 1;
  return GridWorld(std::move(o));
}

// 5 m straight corridor, 0.6 m wide.
GridWorld corridor() {
  Occupancy o(14, 112, 1);
  for (int r = 1; r < 13; ++r) {
    for (int c = 1; c < 111; ++c) o(r, c) = 0;
  }
  return GridWorld(std::move(o));
}

WorldParams small_rooms() {
  WorldParams p;
  p.min_area_m2 = 16.0;
  p.max_area_m2 = 36.0;
  return p;
}

EpisodeConfig explore_cfg(std::uint64_t seed, bool noise, int steps) {
  EpisodeConfig c;
  c.seed = seed;
  c.noise = noise;
  c.max_steps = steps;
  c.map_size = 480;
  return c;
}

}  // namespace

TEST(PointGoal, StartOnGoalStopsImmediately) {
  GridWorld w = l_room();
  w.set_start(w.cell_center({20, 20}, 0.0));
  EpisodeConfig c;
  c.task = Task::PointGoal;
  c.global = GlobalKind::FixedGoal;
  c.goal = Cell{20, 20};
  c.noise = false;
  const EpisodeMetrics m = run_episode(c, w);
  EXPECT_EQ(m.status, EpisodeStatus::Stopped);
  EXPECT_EQ(m.steps, 0);
  EXPECT_TRUE(m.success);
  EXPECT_EQ(m.spl, 1.0);
}

TEST(PointGoal, CorridorIsNearlyStraight) {
  GridWorld w = corridor();
  w.set_start(w.cell_center({6, 5}, 0.0));
  EpisodeConfig c;
  c.task = Task::PointGoal;
  c.global = GlobalKind::FixedGoal;
  c.goal = Cell{6, 105};
  c.noise = false;
  const EpisodeMetrics m = run_episode(c, w);
  EXPECT_TRUE(m.success);
  EXPECT_NEAR(m.shortest_path_m, 5.0, 0.05);
  EXPECT_GE(m.spl, 0.9);
  // Oracle: success times shortest over max(taken, shortest).
  EXPECT_NEAR(m.spl, m.shortest_path_m / std::max(m.path_length_m, m.shortest_path_m), 1e-12);
}

TEST(PointGoal, GoalOnObstacleIsRejected) {
  GridWorld w = l_room();
  EpisodeConfig c;
  c.task = Task::PointGoal;
  c.global = GlobalKind::FixedGoal;
  c.goal = Cell{10, 40};
  EXPECT_THROW(run_episode(c, w), InvalidArgument);
  c.goal.reset();
  EXPECT_THROW(run_episode(c, w), InvalidArgument);
}

TEST(Exploration, NoiseFreeWithoutCorrectionIsExact) {
  GridWorld w = generate_world(3, small_rooms());
  EpisodeConfig c = explore_cfg(3, false, 200);
  c.pose_correction = false;
  c.log_steps = true;
  const EpisodeMetrics m = run_episode(c, w);
  ASSERT_EQ(m.log.size(), 200U);
  for (const StepRecord& r : m.log) {
    ASSERT_NEAR(r.est_pose.x, r.true_pose.x, 1e-6) << r.t;
    ASSERT_NEAR(r.est_pose.y, r.true_pose.y, 1e-6) << r.t;
    ASSERT_NEAR(wrap_angle(r.est_pose.theta - r.true_pose.theta), 0.0, 1e-6) << r.t;
  }
}

TEST(Exploration, NoiseFreeCorrectionDriftIsBounded) {
  // Registration snaps to 5 cm cells, so the estimate can wander slightly.
  GridWorld w = generate_world(3, small_rooms());
  EpisodeConfig c = explore_cfg(3, false, 200);
  c.log_steps = true;
  const EpisodeMetrics m = run_episode(c, w);
  for (const StepRecord& r : m.log) {
    ASSERT_LT(std::hypot(r.est_pose.x - r.true_pose.x, r.est_pose.y - r.true_pose.y), 0.25) << r.t;
    ASSERT_LT(std::abs(wrap_angle(r.est_pose.theta - r.true_pose.theta)), deg2rad(5.0)) << r.t;
  }
}

TEST(Exploration, SameSeedSameResult) {
  GridWorld w = generate_world(4, small_rooms());
  const EpisodeMetrics a = run_episode(explore_cfg(9, true, 150), w);
  const EpisodeMetrics b = run_episode(explore_cfg(9, true, 150), w);
  EXPECT_EQ(a.cov_curve, b.cov_curve);
  EXPECT_EQ(a.final_pose_error_m, b.final_pose_error_m);
  EXPECT_EQ(a.path_length_m, b.path_length_m);
}

TEST(Exploration, CoverageCurveIsMonotone) {
  GridWorld w = generate_world(5, small_rooms());
  const EpisodeMetrics m = run_episode(explore_cfg(5, true, 300), w);
  ASSERT_EQ(m.cov_curve.size(), 301U);
  for (std::size_t i = 1; i < m.cov_curve.size(); ++i) EXPECT_GE(m.cov_curve[i], m.cov_curve[i - 1]);
  EXPECT_GT(m.pct_cov, 0.5);
  EXPECT_LE(m.pct_cov, 1.0);
}

TEST(Exploration, CorrectionOffMatchesOdometry) {
  GridWorld w = generate_world(6, small_rooms());
  EpisodeConfig c = explore_cfg(6, true, 80);
  c.pose_correction = false;
  c.log_steps = true;
  const EpisodeMetrics m = run_episode(c, w);
  for (const StepRecord& r : m.log) {
    EXPECT_NEAR(r.est_pose.x, r.sensor_pose.x, 1e-9);
    EXPECT_NEAR(r.est_pose.y, r.sensor_pose.y, 1e-9);
    EXPECT_NEAR(wrap_angle(r.est_pose.theta - r.sensor_pose.theta), 0.0, 1e-9);
  }
}

TEST(EpisodeSet, FiltersHoldOnEveryEpisode) {
  EpisodeSetParams p;
  p.world = small_rooms();
  p.filters.min_geodesic_m = 2.0;
  p.filters.min_ged_ratio = 1.1;
  const auto set = generate_episode_set(5, 17, p);
  ASSERT_EQ(set.size(), 5U);
  for (const EpisodeSpec& e : set) {
    GridWorld w = generate_world(e.world_seed, p.world);
    const Mask free = free_mask(w.occupancy());
    const Cell s = w.cell_of(e.start);
    const double l = geodesic_distance(free, s, e.goal);
    const double eu = kCellSize * std::hypot(e.goal.row - s.row, e.goal.col - s.col);
    EXPECT_GE(l, 2.0);
    EXPECT_GE(l / eu, 1.1 - 1e-9);
    EXPECT_NEAR(l, e.geodesic_m, 1e-9);
  }
  EXPECT_EQ(generate_episode_set(5, 17, p).front().goal, set.front().goal);
}

TEST(EpisodeSet, ImpossibleFilterFails) {
  EpisodeSetParams p;
  p.world = small_rooms();
  p.worlds_per_episode = 2;
  p.starts_per_world = 3;
  p.filters.min_geodesic_m = 40.0;
  EXPECT_THROW(generate_episode_set(1, 0, p), GenerationFailure);
}

TEST(Metrics, AggregateTrivialCases) {
  EXPECT_EQ(aggregate_metrics({}).episodes, 0U);
  EpisodeMetrics a;
  a.cov_curve = {0.1, 0.2, 0.4};
  a.cov_m2 = 4.0;
  a.success = true;
  a.spl = 0.5;
  EpisodeMetrics b;
  b.cov_curve = {0.3};
  b.cov_m2 = 2.0;
  const MetricsSummary s = aggregate_metrics({a, b});
  EXPECT_EQ(s.episodes, 2U);
  EXPECT_DOUBLE_EQ(s.cov_m2, 3.0);
  EXPECT_DOUBLE_EQ(s.success, 0.5);
  EXPECT_DOUBLE_EQ(s.spl, 0.25);
  ASSERT_EQ(s.curve_mean.size(), 3U);
  EXPECT_DOUBLE_EQ(s.curve_mean[0], 0.2);
  EXPECT_DOUBLE_EQ(s.curve_mean[2], 0.35);
  EXPECT_DOUBLE_EQ(s.curve_std[2], 0.05);
}

TEST(Metrics, CsvHasOneRowPerEpisodePlusMean) {
  EpisodeMetrics a;
  a.cov_curve = {0.5};
  const std::string csv = metrics_csv({a, a}, {7, 8});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\n0,7,"), std::string::npos);
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
}
