#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "ans/action.hpp"
#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/mapping.hpp"
#include "ans/planner.hpp"

namespace ans {

inline constexpr int kGlobalInputSize = 240;
inline constexpr int kGoalInterval = 25;

// ---------------------------------------------------------------------------
// Global policy input

/// 8 x G x G: channels 0-3 are a G x G crop of (obstacle, explored, agent,
/// visited) centred on the agent, channels 4-7 the same layers max-pooled
/// over the whole map.
inline ChannelGrid build_global_input(const SpatialMap& map, const Pose& pose,
                                      const Mask& visited, int g = kGlobalInputSize) {
  const int m = map.size();
  if (g <= 0 || m % g != 0) {
    throw InvalidArgument("global input: map size must be a multiple of G");
  }
  if (visited.rows() != m || visited.cols() != m) {
    throw InvalidArgument("global input: visited mask does not match the map");
  }
  const Cell agent = map.cell_of(pose);
  if (!map.in_bounds(agent)) throw OutOfBounds("global input: pose outside the map");
  auto layer = [&](int ch, int r, int c) -> float {
    switch (ch) {
      case 0: return map.obstacle(r, c);
      case 1: return map.explored(r, c);
      case 2: return (r == agent.row && c == agent.col) ? 1.0F : 0.0F;
      default: return visited(r, c) ? 1.0F : 0.0F;
    }
  };
  ChannelGrid out(8, g, g);
  const int r0 = agent.row - g / 2;
  const int c0 = agent.col - g / 2;
  for (int ch = 0; ch < 4; ++ch) {
    for (int i = 0; i < g; ++i) {
      const int r = r0 + i;
      if (r < 0 || r >= m) continue;
      for (int j = 0; j < g; ++j) {
        const int c = c0 + j;
        if (c < 0 || c >= m) continue;
        out.at(ch, i, j) = layer(ch, r, c);
      }
    }
  }
  const int f = m / g;
  for (int ch = 0; ch < 4; ++ch) {
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        float& cell = out.at(ch + 4, r / f, c / f);
        cell = std::max(cell, layer(ch, r, c));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Frontier goals

inline bool is_explored_free(const SpatialMap& m, Cell c) {
  return m.explored(c) > 0.5F && m.obstacle(c) < 0.5F;
}

/// Explored free cell with an unexplored 4-neighbour.
inline bool is_frontier(const SpatialMap& m, Cell c) {
  if (!m.in_bounds(c) || !is_explored_free(m, c)) return false;
  const Cell nb[4] = {{c.row - 1, c.col}, {c.row + 1, c.col},
                      {c.row, c.col - 1}, {c.row, c.col + 1}};
  for (const Cell& n : nb) {
    if (m.in_bounds(n) && m.explored(n) <= 0.5F) return true;
  }
  return false;
}

struct FrontierParams {
  PlannerParams planner;
  // Frontier cells closer than this are skipped so the agent does not pick
  // the cell it is standing on.
  double min_goal_distance = 0.25;
};

struct FrontierResult {
  Cell goal;
  double distance = kInf;  // planner travel time from the agent
  bool saturated = false;
};

/// Nearest frontier by planner travel time from the agent (ties by (row,
/// col)); with no frontier left, the farthest reachable explored free cell.
inline FrontierResult frontier_goal(const SpatialMap& map, const Pose& pose, Rect known,
                                    const FrontierParams& p = {}) {
  const Cell agent = map.cell_of(pose);
  if (!map.in_bounds(agent)) throw OutOfBounds("frontier_goal: pose outside the map");
  const Rect w = planning_window(map, known, agent, agent, p.planner.window_margin);
  FrontierResult res;
  std::optional<Cell> found;
  std::optional<Cell> farthest;
  double far_t = -1.0;
  FmmOptions opt;
  opt.on_accept = [&](Cell c, double t) {
    if (!is_explored_free(map, c)) return true;
    if (t >= p.min_goal_distance - 1e-9 && is_frontier(map, c)) {
      found = c;
      res.distance = t;
      return false;
    }
    // Acceptance order is (T, row-major index), so the first cell seen at
    // the largest T is the lexicographically smallest one.
    if (t > far_t) {
      far_t = t;
      farthest = c;
    }
    return true;
  };
  fmm(agent_traversable_mask(map, w, agent, p.planner), agent, w, map.resolution(), opt);
  if (found) {
    res.goal = *found;
    return res;
  }
  res.saturated = true;
  res.goal = farthest.value_or(agent);
  res.distance = farthest ? far_t : 0.0;
  return res;
}

// ---------------------------------------------------------------------------
// Global policies

struct GlobalObservation {
  const SpatialMap& map;
  Pose pose;
  const Mask& visited;
  Rect known;
};

struct GoalChoice {
  Cell goal;
  bool saturated = false;
};

class GlobalPolicy {
 public:
  virtual ~GlobalPolicy() = default;
  virtual GoalChoice next_goal(const GlobalObservation& obs) = 0;
  virtual std::string_view name() const = 0;
};

class FrontierPolicy final : public GlobalPolicy {
 public:
  explicit FrontierPolicy(FrontierParams p = {}) : params_(p) {}
  GoalChoice next_goal(const GlobalObservation& obs) override {
    const FrontierResult r = frontier_goal(obs.map, obs.pose, obs.known, params_);
    return {r.goal, r.saturated};
  }
  std::string_view name() const override { return "frontier"; }

 private:
  FrontierParams params_;
};

/// Uniform cell of the pooled G x G map, scaled back to map cells. Meant for
/// diagnostics.
class RandomGoalPolicy final : public GlobalPolicy {
 public:
  explicit RandomGoalPolicy(std::uint64_t seed, int g = kGlobalInputSize)
      : rng_(seed), g_(g) {}
  GoalChoice next_goal(const GlobalObservation& obs) override {
    const int m = obs.map.size();
    const int f = std::max(1, m / g_);
    std::uniform_int_distribution<int> pick(0, g_ - 1);
    const int i = pick(rng_);
    const int j = pick(rng_);
    return {{std::min(m - 1, i * f + f / 2), std::min(m - 1, j * f + f / 2)}, false};
  }
  std::string_view name() const override { return "random"; }

 private:
  std::mt19937_64 rng_;
  int g_;
};

class FixedGoalPolicy final : public GlobalPolicy {
 public:
  explicit FixedGoalPolicy(Cell goal) : goal_(goal) {}
  GoalChoice next_goal(const GlobalObservation&) override { return {goal_, false}; }
  std::string_view name() const override { return "fixed_goal"; }

 private:
  Cell goal_;
};

inline double global_reward(double prev_cov_m2, double cur_cov_m2) {
  return 0.02 * std::max(0.0, cur_cov_m2 - prev_cov_m2);
}

// ---------------------------------------------------------------------------
// Local policy

inline constexpr int kMaxDistanceBin = 27;
inline constexpr int kAngleBins = 72;

struct LocalInput {
  int distance_bin = 0;
  int angle_bin = 0;
  int time_bin = 0;
};

/// Distance (m) and bearing (degrees, (-180, 180], counter-clockwise) of a
/// map cell as seen from `pose`.
inline std::pair<double, double> relative_goal(const SpatialMap& map, const Pose& pose,
                                               Cell goal) {
  const Point2 local = to_local(pose, map.center(goal));
  const double d = std::hypot(local.x, local.y);
  double a = rad2deg(std::atan2(local.y, local.x));
  if (a <= -180.0) a = 180.0;
  return {d, a};
}

inline int distance_bin(double d) {
  int b = 0;
  if (d <= 1.0) {
    b = static_cast<int>(std::ceil(d / 0.25 - 1e-12)) - 1;
  } else if (d <= 3.0) {
    b = 4 + static_cast<int>(std::ceil((d - 1.0) / 0.5 - 1e-12)) - 1;
  } else {
    b = 8 + static_cast<int>(std::ceil(d - 3.0 - 1e-12)) - 1;
  }
  return std::clamp(b, 0, kMaxDistanceBin);
}

inline int angle_bin(double deg) {
  const int b = static_cast<int>(std::floor((deg + 2.5) / 5.0));
  return ((b % kAngleBins) + kAngleBins) % kAngleBins;
}

inline LocalInput featurize_local(const SpatialMap& map, const Pose& pose, Cell goal, int t) {
  const auto [d, a] = relative_goal(map, pose, goal);
  return {distance_bin(d), angle_bin(a), std::max(0, t) / 30};
}

inline constexpr double kTurnThresholdDeg = 10.0;

inline Action deterministic_local(const SpatialMap& map, const Pose& pose, Cell goal) {
  if (map.cell_of(pose) == goal) return Action::Forward;
  const double a = relative_goal(map, pose, goal).second;
  if (a > kTurnThresholdDeg) return Action::TurnLeft;
  if (a < -kTurnThresholdDeg) return Action::TurnRight;
  return Action::Forward;
}

}  // namespace ans
