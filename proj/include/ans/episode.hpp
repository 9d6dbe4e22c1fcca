#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ans/action.hpp"
#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/io.hpp"
#include "ans/mapping.hpp"
#include "ans/noise.hpp"
#include "ans/parallel.hpp"
#include "ans/planner.hpp"
#include "ans/policies.hpp"
#include "ans/pose_estimator.hpp"
#include "ans/world.hpp"
#include "json.hpp"

namespace ans {

enum class Task { Exploration, PointGoal };
enum class GlobalKind { Frontier, Random, FixedGoal };
enum class EpisodeStatus { Done, MapOverflow, Stopped };

inline std::string_view task_name(Task t) {
  return t == Task::Exploration ? "exploration" : "pointgoal";
}
inline std::string_view global_kind_name(GlobalKind g) {
  switch (g) {
    case GlobalKind::Frontier: return "frontier";
    case GlobalKind::Random: return "random";
    case GlobalKind::FixedGoal: return "fixed_goal";
  }
  return "frontier";
}
inline std::optional<GlobalKind> parse_global_kind(std::string_view s) {
  for (auto g : {GlobalKind::Frontier, GlobalKind::Random, GlobalKind::FixedGoal}) {
    if (global_kind_name(g) == s) return g;
  }
  return std::nullopt;
}
inline std::string_view status_name(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::Done: return "done";
    case EpisodeStatus::MapOverflow: return "map_overflow";
    case EpisodeStatus::Stopped: return "stopped";
  }
  return "done";
}

inline constexpr double kStopDistance = 0.15;
inline constexpr double kSuccessDistance = 0.2;

struct EpisodeConfig {
  Task task = Task::Exploration;
  int max_steps = 0;  // 0: 1000 for exploration, 500 for pointgoal
  bool noise = true;
  bool pose_correction = true;
  GlobalKind global = GlobalKind::Frontier;
  std::optional<Cell> goal;  // world cell, pointgoal only
  std::uint64_t seed = 0;
  int map_size = 960;
  bool collision_layer = true;
  bool log_steps = false;

  NoiseModelSet noise_models = default_noise_models();
  ScanParams scan;
  PoseSearch search;
  PlannerParams planner;
  FrontierParams frontier;

  int steps_limit() const {
    if (max_steps > 0) return max_steps;
    return task == Task::Exploration ? 1000 : 500;
  }
};

struct StepRecord {
  int t = 0;
  Action action = Action::Forward;
  Pose true_pose;    // map frame
  Pose sensor_pose;  // map frame
  Pose est_pose;     // map frame
  Cell goal_lt;
  Cell goal_st;
  double cov_m2 = 0.0;
  double pct_cov = 0.0;
  double reward = 0.0;
};

struct EpisodeMetrics {
  double cov_m2 = 0.0;
  double pct_cov = 0.0;
  double predicted_cov_m2 = 0.0;       // explored cells of the map
  double predicted_free_cov_m2 = 0.0;  // explored and not obstacle
  std::vector<double> cov_curve;       // %Cov after the initial view and each step
  bool success = false;
  double spl = 0.0;
  double path_length_m = 0.0;
  double shortest_path_m = 0.0;
  double ged_ratio = 0.0;
  double final_pose_error_m = 0.0;
  int steps = 0;
  EpisodeStatus status = EpisodeStatus::Done;
  std::vector<StepRecord> log;
};

/// Picks a start pose when the world file has none: a seeded draw among
/// cells with at least 0.15 m clearance.
inline Pose choose_start(const GridWorld& world, std::uint64_t seed) {
  if (world.start()) return *world.start();
  std::vector<Cell> cands;
  std::vector<Cell> any;
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) {
      if (world.occupancy()(r, c)) continue;
      any.push_back({r, c});
      const Pose p = world.cell_center({r, c});
      if (world.clearance(p.x, p.y, kStartClearance) >= kStartClearance) cands.push_back({r, c});
    }
  }
  if (cands.empty()) cands = any;
  if (cands.empty()) throw InvalidArgument("world has no free cell for a start");
  std::mt19937_64 rng(seed);
  const auto i = std::uniform_int_distribution<std::size_t>(0, cands.size() - 1)(rng);
  const double th = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
  return world.cell_center(cands[i], wrap_angle(th));
}

/// Free cells whose centre keeps the agent radius from every obstacle: the
/// part of the world the agent can physically occupy.
inline Mask agent_free_mask(const GridWorld& world) {
  Mask m(world.rows(), world.cols(), 0);
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) {
      if (world.occupancy()(r, c)) continue;
      const Pose p = world.cell_center({r, c});
      m(r, c) = world.clearance(p.x, p.y) >= kAgentRadius ? 1 : 0;
    }
  }
  return m;
}

namespace detail {

inline std::unique_ptr<GlobalPolicy> make_global_policy(const EpisodeConfig& cfg,
                                                        std::optional<Cell> map_goal) {
  switch (cfg.global) {
    case GlobalKind::Frontier: return std::make_unique<FrontierPolicy>(cfg.frontier);
    case GlobalKind::Random:
      return std::make_unique<RandomGoalPolicy>(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    case GlobalKind::FixedGoal:
      if (!map_goal) throw InvalidArgument("fixed_goal policy needs a goal");
      return std::make_unique<FixedGoalPolicy>(*map_goal);
  }
  throw InvalidArgument("unknown global policy");
}

// Marks the strip 0.15-0.25 m ahead of a blocked forward move as obstacle.
inline void mark_collision(SpatialMap& map, const Pose& est) {
  for (double f : {0.15, 0.2, 0.25}) {
    for (double l : {-0.1, -0.05, 0.0, 0.05, 0.1}) {
      const Point2 p = to_world(est, {f, l});
      const Cell c = map.cell_of(p.x, p.y);
      if (!map.in_bounds(c)) continue;
      map.grid().at(kObstacleChannel, c.row, c.col) = 1.0F;
      map.grid().at(kExploredChannel, c.row, c.col) = 1.0F;
    }
  }
}

}  // namespace detail

/// One episode of the full loop: sense, project, correct the pose, map,
/// choose goals, plan, act. `world` is consumed (each worker owns one).
/// What a renderer needs after an episode: the final map, its known bounds,
/// the estimated trajectory in map cells and the goal, if any.
struct EpisodeTrace {
  std::optional<SpatialMap> map;
  Rect known;
  std::vector<Cell> trajectory;
  std::optional<Cell> goal;
};

inline EpisodeMetrics run_episode(const EpisodeConfig& cfg, GridWorld world,
                                  EpisodeTrace* trace = nullptr) {
  if (cfg.task == Task::PointGoal && !cfg.goal) {
    throw InvalidArgument("pointgoal episode needs a goal");
  }
  if (cfg.steps_limit() < 1) throw InvalidArgument("max_steps must be >= 1");
  const Pose start = choose_start(world, cfg.seed);
  world.set_start(start);
  world.reset();
  world.seed_noise(cfg.seed);

  SpatialMap map(cfg.map_size);
  const Pose origin = map.origin();
  auto to_map = [&](const Pose& p) { return compose(origin, between(start, p)); };
  SlamState slam = make_slam_state(origin, cfg.pose_correction, cfg.search);
  Pose sensor = origin;
  Pose est = origin;
  Mask visited(cfg.map_size, cfg.map_size, 0);
  Rect known{};

  EpisodeMetrics out;
  std::optional<Cell> map_goal;
  Pose goal_pose_map;
  if (cfg.task == Task::PointGoal) {
    if (world.is_obstacle(cfg.goal->row, cfg.goal->col)) {
      throw InvalidArgument("pointgoal goal " + to_string(*cfg.goal) + " is not free");
    }
    goal_pose_map = to_map(world.cell_center(*cfg.goal));
    map_goal = map.cell_of(goal_pose_map);
    const Mask free = free_mask(world.occupancy());
    out.shortest_path_m = geodesic_distance(free, world.cell_of(start), *cfg.goal);
    const double eu = distance(world.cell_center(world.cell_of(start)),
                               world.cell_center(*cfg.goal));
    out.ged_ratio = eu > 0.0 ? out.shortest_path_m / eu : 1.0;
  }
  std::unique_ptr<GlobalPolicy> policy;
  if (cfg.task == Task::PointGoal) {
    policy = std::make_unique<FixedGoalPolicy>(*map_goal);
  } else {
    policy = detail::make_global_policy(cfg, map_goal);
  }

  bool overflow = false;
  auto observe = [&] {
    const RangeScan scan = range_scan(world, cfg.scan);
    const EgoMap ego = project_ego(scan);
    est = slam_update(slam, ego, sensor, &map);
    try {
      known = bounding_union(known, aggregate_into(map, ego, est));
    } catch (const OutOfBounds&) {
      overflow = true;
      return;
    }
    visited[map.cell_of(est)] = 1;
    if (trace) trace->trajectory.push_back(map.cell_of(est));
  };

  observe();
  Coverage cov = true_coverage(world);
  out.cov_curve.push_back(cov.fraction);
  Cell goal = map_goal.value_or(map.cell_of(est));
  bool need_goal = true;
  int t = 0;
  const int limit = cfg.steps_limit();
  for (; t < limit && !overflow; ++t) {
    if (cfg.task == Task::PointGoal &&
        distance(est, goal_pose_map) < kStopDistance) {
      out.status = EpisodeStatus::Stopped;
      if (cfg.log_steps) {
        StepRecord rec{t, Action::Stop, to_map(world.agent()), sensor, est, goal, goal,
                       cov.area_m2, cov.fraction, 0.0};
        out.log.push_back(rec);
      }
      break;
    }
    if (need_goal || t % kGoalInterval == 0) {
      goal = policy->next_goal({map, est, visited, known}).goal;
      need_goal = false;
    }
    const Cell agent = map.cell_of(est);
    const DistanceField field = plan_field(map, goal, agent, known, cfg.planner);
    const PlanResult plan = extract_path(field, agent);
    Action action = Action::TurnLeft;
    if (plan.reachable) action = deterministic_local(map, est, plan.short_term_goal);
    if (cfg.global == GlobalKind::Frontier && cfg.task == Task::Exploration &&
        (!plan.reachable || field.at(agent) < kShortTermGoalDistance)) {
      need_goal = true;
    }

    const PoseDelta true_delta = step(world, action, cfg.noise_models, cfg.noise);
    const PoseDelta odom = odometry(world, true_delta, cfg.noise_models, cfg.noise, action);
    sensor = compose(sensor, odom);
    out.path_length_m += true_delta.translation();
    observe();
    if (overflow) {
      ++t;
      break;
    }
    if (cfg.collision_layer && action == Action::Forward && odom.translation() < 0.1) {
      detail::mark_collision(map, est);
    }
    const Coverage next = true_coverage(world);
    const double reward = global_reward(cov.area_m2, next.area_m2);
    cov = next;
    out.cov_curve.push_back(cov.fraction);
    if (cfg.log_steps) {
      out.log.push_back({t, action, to_map(world.agent()), sensor, est, goal,
                         plan.short_term_goal, cov.area_m2, cov.fraction, reward});
    }
  }
  if (overflow) out.status = EpisodeStatus::MapOverflow;
  out.steps = t;
  out.cov_m2 = cov.area_m2;
  out.pct_cov = cov.fraction;
  const PredictedCoverage pc = predicted_coverage(map);
  out.predicted_cov_m2 = pc.area_m2;
  out.predicted_free_cov_m2 = pc.free_area_m2;
  const Pose truth = to_map(world.agent());
  out.final_pose_error_m = distance(truth, est);
  if (cfg.task == Task::PointGoal) {
    const double d = distance(world.agent(), world.cell_center(*cfg.goal));
    out.success = d <= kSuccessDistance;
    const double l = out.shortest_path_m;
    const double p = out.path_length_m;
    out.spl = out.success ? (std::max(p, l) > 0.0 ? l / std::max(p, l) : 1.0) : 0.0;
  }
  if (trace) {
    trace->known = known;
    trace->goal = map_goal;
    trace->map = std::move(map);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Episode sets

struct EpisodeFilters {
  double min_geodesic_m = 0.0;
  double min_ged_ratio = 0.0;
};

struct EpisodeSpec {
  std::uint64_t world_seed = 0;
  Pose start;  // world frame
  Cell goal;
  double geodesic_m = 0.0;
  double ged_ratio = 1.0;
};

struct EpisodeSetParams {
  WorldParams world;
  EpisodeFilters filters;
  int worlds_per_episode = 10;  // world draws tried per episode
  int starts_per_world = 10;    // start cells tried per world
};

/// Tries up to `starts` start cells on one world and returns the first
/// start/goal pair meeting the filters. Start and goal keep 0.15 m
/// clearance and are connected for the agent's footprint; the geodesic
/// distance comes from the ground-truth free mask.
template <typename Rng>
std::optional<EpisodeSpec> sample_episode(const GridWorld& world, Rng& rng,
                                          const EpisodeFilters& filters, int starts) {
  const Mask free = free_mask(world.occupancy());
  const Mask body = agent_free_mask(world);
  std::vector<Cell> roomy;
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) {
      if (world.occupancy()(r, c)) continue;
      const Pose q = world.cell_center({r, c});
      if (world.clearance(q.x, q.y, kStartClearance) >= kStartClearance) roomy.push_back({r, c});
    }
  }
  if (roomy.size() < 2) return std::nullopt;
  for (int s = 0; s < starts; ++s) {
    const Cell sc = roomy[std::uniform_int_distribution<std::size_t>(0, roomy.size() - 1)(rng)];
    const DistanceField geo = fmm(free, sc);
    const DistanceField reach = fmm(body, sc);
    std::vector<std::pair<Cell, std::pair<double, double>>> ok;
    for (const Cell& g : roomy) {
      if (g == sc) continue;
      const double l = geo.at(g);
      if (!(l < kInf) || !(reach.at(g) < kInf)) continue;
      const double eu = std::hypot(g.row - sc.row, g.col - sc.col) * kCellSize;
      const double ratio = l / eu;
      if (l >= filters.min_geodesic_m && ratio >= filters.min_ged_ratio) {
        ok.push_back({g, {l, ratio}});
      }
    }
    if (ok.empty()) continue;
    const auto& pick = ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)];
    const double th = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    return EpisodeSpec{0, world.cell_center(sc, wrap_angle(th)), pick.first, pick.second.first,
                       pick.second.second};
  }
  return std::nullopt;
}

/// Rejection-samples (world, start, goal) triples over generated worlds.
inline std::vector<EpisodeSpec> generate_episode_set(int n, std::uint64_t seed,
                                                     const EpisodeSetParams& p) {
  if (n < 0) throw InvalidArgument("generate_episode_set: n must be >= 0");
  std::vector<EpisodeSpec> out;
  for (int i = 0; i < n; ++i) {
    bool done = false;
    for (int wk = 0; wk < p.worlds_per_episode && !done; ++wk) {
      const std::uint64_t wseed = seed * 1000003ULL + static_cast<std::uint64_t>(i) * 1009ULL +
                                  static_cast<std::uint64_t>(wk);
      GridWorld world;
      try {
        world = generate_world(wseed, p.world);
      } catch (const GenerationFailure&) {
        continue;
      }
      std::mt19937_64 rng(wseed ^ 0x5bd1e995ULL);
      if (auto e = sample_episode(world, rng, p.filters, p.starts_per_world)) {
        e->world_seed = wseed;
        out.push_back(*e);
        done = true;
      }
    }
    if (!done) {
      throw GenerationFailure("generate_episode_set: episode " + std::to_string(i) +
                              " found no start/goal pair meeting the filters");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries and files

struct MetricsSummary {
  std::size_t episodes = 0;
  double cov_m2 = 0.0;
  double pct_cov = 0.0;
  double success = 0.0;
  double spl = 0.0;
  double path_length_m = 0.0;
  double final_pose_error_m = 0.0;
  std::vector<double> curve_mean;
  std::vector<double> curve_std;
};

inline MetricsSummary aggregate_metrics(const std::vector<EpisodeMetrics>& runs) {
  MetricsSummary s;
  s.episodes = runs.size();
  if (runs.empty()) return s;
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.cov_curve.size());
  s.curve_mean.assign(len, 0.0);
  s.curve_std.assign(len, 0.0);
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    s.cov_m2 += r.cov_m2 / n;
    s.pct_cov += r.pct_cov / n;
    s.success += (r.success ? 1.0 : 0.0) / n;
    s.spl += r.spl / n;
    s.path_length_m += r.path_length_m / n;
    s.final_pose_error_m += r.final_pose_error_m / n;
  }
  // Episodes that ended early hold their last coverage value.
  auto value = [](const EpisodeMetrics& r, std::size_t i) {
    if (r.cov_curve.empty()) return 0.0;
    return r.cov_curve[std::min(i, r.cov_curve.size() - 1)];
  };
  for (std::size_t i = 0; i < len; ++i) {
    double m = 0.0;
    for (const auto& r : runs) m += value(r, i);
    m /= n;
    double v = 0.0;
    for (const auto& r : runs) v += (value(r, i) - m) * (value(r, i) - m);
    s.curve_mean[i] = m;
    s.curve_std[i] = std::sqrt(v / n);
  }
  return s;
}

inline std::string metrics_csv(const std::vector<EpisodeMetrics>& runs,
                               const std::vector<std::uint64_t>& seeds) {
  std::string out =
      "episode,seed,status,steps,cov_m2,pct_cov,pred_cov_m2,success,spl,"
      "path_length_m,shortest_path_m,ged_ratio,final_pose_error_m\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    out += std::to_string(i) + "," + std::to_string(i < seeds.size() ? seeds[i] : i) + "," +
           std::string(status_name(r.status)) + "," + std::to_string(r.steps) + "," +
           format_metric(r.cov_m2) + "," + format_metric(r.pct_cov) + "," +
           format_metric(r.predicted_cov_m2) + "," + (r.success ? "1" : "0") + "," +
           format_metric(r.spl) + "," + format_metric(r.path_length_m) + "," +
           format_metric(r.shortest_path_m) + "," + format_metric(r.ged_ratio) + "," +
           format_metric(r.final_pose_error_m) + "\n";
  }
  const MetricsSummary s = aggregate_metrics(runs);
  double steps = 0.0, pred = 0.0, l = 0.0, ged = 0.0;
  for (const auto& r : runs) {
    steps += r.steps;
    pred += r.predicted_cov_m2;
    l += r.shortest_path_m;
    ged += r.ged_ratio;
  }
  const double n = runs.empty() ? 1.0 : static_cast<double>(runs.size());
  out += "mean,,," + format_metric(steps / n) + "," + format_metric(s.cov_m2) + "," +
         format_metric(s.pct_cov) + "," + format_metric(pred / n) + "," +
         format_metric(s.success) + "," + format_metric(s.spl) + "," +
         format_metric(s.path_length_m) + "," + format_metric(l / n) + "," +
         format_metric(ged / n) + "," + format_metric(s.final_pose_error_m) + "\n";
  return out;
}

inline std::string curve_csv(const MetricsSummary& s) {
  std::string out = "step,mean_pct_cov,std_pct_cov\n";
  for (std::size_t i = 0; i < s.curve_mean.size(); ++i) {
    out += std::to_string(i) + "," + format_metric(s.curve_mean[i]) + "," +
           format_metric(s.curve_std[i]) + "\n";
  }
  return out;
}

inline std::string step_log_jsonl(const std::vector<StepRecord>& log) {
  auto pose = [](const Pose& p) { return nlohmann::json::array({p.x, p.y, p.theta}); };
  auto cell = [](Cell c) { return nlohmann::json::array({c.row, c.col}); };
  std::string out;
  for (const auto& r : log) {
    nlohmann::json j = {{"t", r.t},
                        {"action", std::string(action_name(r.action))},
                        {"true_pose", pose(r.true_pose)},
                        {"sensor_pose", pose(r.sensor_pose)},
                        {"est_pose", pose(r.est_pose)},
                        {"goal_lt", cell(r.goal_lt)},
                        {"goal_st", cell(r.goal_st)},
                        {"cov_m2", r.cov_m2},
                        {"pct_cov", r.pct_cov},
                        {"reward", r.reward}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace ans
