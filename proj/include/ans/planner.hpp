#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "ans/errors.hpp"
#include "ans/grid.hpp"
#include "ans/mapping.hpp"

namespace ans {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kShortTermGoalDistance = 0.25;

using Mask = Grid<std::uint8_t>;  // 1 = traversable

/// Travel-time field over a window of a larger grid. Cells outside the
/// window read as unreachable.
struct DistanceField {
  Grid<double> T;
  Mask traversable;
  Rect window;  // placement of T in the parent grid
  Cell source;  // in parent coordinates
  double h = kCellSize;

  double at(Cell c) const {
    if (!window.contains(c)) return kInf;
    return T(c.row - window.row0, c.col - window.col0);
  }
  bool passable(Cell c) const {
    return window.contains(c) && traversable(c.row - window.row0, c.col - window.col0);
  }
};

struct FmmOptions {
  std::optional<Cell> stop_at;  // parent coordinates; stop once accepted
  // Called for every accepted cell in order; return false to stop early.
  std::function<bool(Cell, double)> on_accept;
  // Cells within this many cells of the source that it can see in a
  // straight line start at their exact Euclidean distance. This removes most
  // of the first-order error, which is largest next to a point source.
  int exact_radius = 12;
};

namespace detail {

inline constexpr int kDr8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
inline constexpr int kDc8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

// Diagonal moves may not squeeze between two blocked orthogonal cells.
inline bool diagonal_open(const Mask& m, int r, int c, int dr, int dc) {
  return m.in_bounds(r + dr, c) && m(r + dr, c) && m.in_bounds(r, c + dc) && m(r, c + dc);
}

// True when the straight segment between the centres of a and b only
// touches traversable cells, counting cells grazed at a corner.
inline bool line_of_sight(const Mask& m, Cell a, Cell b) {
  const double dr = b.row - a.row;
  const double dc = b.col - a.col;
  const int n = static_cast<int>(std::ceil(std::max(std::abs(dr), std::abs(dc)) * 8.0));
  constexpr double e = 1e-6;
  for (int i = 0; i <= n; ++i) {
    const double s = n ? double(i) / n : 0.0;
    const double r = a.row + s * dr;
    const double c = a.col + s * dc;
    for (double er : {-e, e}) {
      for (double ec : {-e, e}) {
        const int rr = static_cast<int>(std::floor(r + 0.5 + er));
        const int cc = static_cast<int>(std::floor(c + 0.5 + ec));
        if (!m.in_bounds(rr, cc) || !m(rr, cc)) return false;
      }
    }
  }
  return true;
}

inline double quad_update(double a, double b, double h) {
  if (a > b) std::swap(a, b);
  double t = a + h;
  if (b < kInf && b - a < h) {
    const double d = b - a;
    t = std::min(t, 0.5 * (a + b + std::sqrt(2.0 * h * h - d * d)));
  }
  return t;
}

}  // namespace detail

/// First-order upwind eikonal solve from `goal` with unit speed over
/// `traversable` (local window coordinates are `window`). Each cell takes
/// the best of the axis-aligned quadratic update and the same update on the
/// diagonal stencil (spacing sqrt(2) h); the one-sided forms coincide with
/// 8-connected shortest-path relaxations, so the field never exceeds the
/// 8-connected graph distance.
inline DistanceField fmm(Mask traversable, Cell goal, Rect window,
                         double h = kCellSize, const FmmOptions& opt = {}) {
  if (!window.contains(goal)) {
    throw InvalidArgument("fmm: goal " + to_string(goal) + " outside the grid");
  }
  if (traversable.rows() != window.rows || traversable.cols() != window.cols) {
    throw InvalidArgument("fmm: window does not match the mask");
  }
  DistanceField f;
  f.window = window;
  f.source = goal;
  f.h = h;
  const int rows = window.rows;
  const int cols = window.cols;
  const Cell g{goal.row - window.row0, goal.col - window.col0};
  traversable[g] = 1;
  f.T = Grid<double>(rows, cols, kInf);
  Grid<std::uint8_t> accepted(rows, cols, 0);
  const double hd = std::sqrt(2.0) * h;

  using Entry = std::pair<double, std::uint32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  f.T[g] = 0.0;
  heap.push({0.0, static_cast<std::uint32_t>(f.T.index(g.row, g.col))});
  const int er = std::max(0, opt.exact_radius);
  for (int r = std::max(0, g.row - er); r <= std::min(rows - 1, g.row + er); ++r) {
    for (int c = std::max(0, g.col - er); c <= std::min(cols - 1, g.col + er); ++c) {
      const double d2 = double(r - g.row) * (r - g.row) + double(c - g.col) * (c - g.col);
      if (d2 == 0.0 || d2 > double(er) * er || !traversable(r, c)) continue;
      if (!detail::line_of_sight(traversable, g, {r, c})) continue;
      f.T(r, c) = std::sqrt(d2) * h;
      heap.push({f.T(r, c), static_cast<std::uint32_t>(f.T.index(r, c))});
    }
  }

  std::optional<Cell> stop;
  if (opt.stop_at && window.contains(*opt.stop_at)) {
    stop = Cell{opt.stop_at->row - window.row0, opt.stop_at->col - window.col0};
  }
  const Mask& m = traversable;
  auto known = [&](int r, int c) -> double {
    return (m.in_bounds(r, c) && accepted(r, c)) ? f.T(r, c) : kInf;
  };
  auto known_diag = [&](int r, int c, int dr, int dc) -> double {
    if (!m.in_bounds(r + dr, c + dc) || !detail::diagonal_open(m, r, c, dr, dc)) return kInf;
    return known(r + dr, c + dc);
  };

  while (!heap.empty()) {
    const auto [t, idx] = heap.top();
    heap.pop();
    const int r = static_cast<int>(idx / static_cast<std::uint32_t>(cols));
    const int c = static_cast<int>(idx % static_cast<std::uint32_t>(cols));
    if (accepted(r, c) || t > f.T(r, c)) continue;
    accepted(r, c) = 1;
    const Cell parent{r + window.row0, c + window.col0};
    if (opt.on_accept && !opt.on_accept(parent, t)) break;
    if (stop && stop->row == r && stop->col == c) break;
    for (int k = 0; k < 8; ++k) {
      const int nr = r + detail::kDr8[k];
      const int nc = c + detail::kDc8[k];
      if (!m.in_bounds(nr, nc) || !m(nr, nc) || accepted(nr, nc)) continue;
      if (detail::kDr8[k] != 0 && detail::kDc8[k] != 0 &&
          !detail::diagonal_open(m, r, c, detail::kDr8[k], detail::kDc8[k])) {
        continue;
      }
      const double ax = std::min(known(nr, nc - 1), known(nr, nc + 1));
      const double ay = std::min(known(nr - 1, nc), known(nr + 1, nc));
      const double d1 = std::min(known_diag(nr, nc, -1, 1), known_diag(nr, nc, 1, -1));
      const double d2 = std::min(known_diag(nr, nc, -1, -1), known_diag(nr, nc, 1, 1));
      double nt = kInf;
      if (std::min(ax, ay) < kInf) nt = detail::quad_update(ax, ay, h);
      if (std::min(d1, d2) < kInf) nt = std::min(nt, detail::quad_update(d1, d2, hd));
      if (nt < f.T(nr, nc)) {
        f.T(nr, nc) = nt;
        heap.push({nt, static_cast<std::uint32_t>(f.T.index(nr, nc))});
      }
    }
  }
  // Cells still tentative after an early stop keep upper-bound values; only
  // accepted cells are final.
  f.traversable = std::move(traversable);
  return f;
}

inline DistanceField fmm(Mask traversable, Cell goal, double h = kCellSize,
                         const FmmOptions& opt = {}) {
  const Rect w = traversable.bounds();
  return fmm(std::move(traversable), goal, w, h, opt);
}

struct PlannerParams {
  double threshold = 0.5;
  int dilation = 2;
  int window_margin = 40;
};

/// Cells with obstacle value >= threshold, grown by a disc of `dilation`
/// cells, are blocked; unexplored space counts as free. Returns the mask for
/// `window` of the map.
inline Mask traversable_mask(const SpatialMap& map, Rect window, const PlannerParams& p) {
  Mask free(window.rows, window.cols, 1);
  const int d = p.dilation;
  const float thr = static_cast<float>(p.threshold);
  const Rect src = intersect(expand(window, d), map.grid().bounds());
  for (int r = src.row0; r < src.row_end(); ++r) {
    for (int c = src.col0; c < src.col_end(); ++c) {
      if (map.obstacle(r, c) < thr) continue;
      for (int dr = -d; dr <= d; ++dr) {
        for (int dc = -d; dc <= d; ++dc) {
          if (dr * dr + dc * dc > d * d) continue;
          const int lr = r + dr - window.row0;
          const int lc = c + dc - window.col0;
          if (free.in_bounds(lr, lc)) free(lr, lc) = 0;
        }
      }
    }
  }
  return free;
}

/// Bounding box of cells explored in `map` (empty when none).
inline Rect explored_bounds(const SpatialMap& map) {
  int r0 = map.size(), r1 = -1, c0 = map.size(), c1 = -1;
  for (int r = 0; r < map.size(); ++r) {
    const float* row = &map.grid().channel(kExploredChannel)[static_cast<std::size_t>(r) * map.size()];
    for (int c = 0; c < map.size(); ++c) {
      if (row[c] > 0.0F) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
    }
  }
  if (r1 < 0) return {};
  return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

/// Planning window: the known region plus agent and goal, with a margin.
inline Rect planning_window(const SpatialMap& map, Rect known, Cell agent, Cell goal,
                            int margin) {
  Rect w = bounding_union(known, Rect{agent.row, agent.col, 1, 1});
  w = bounding_union(w, Rect{goal.row, goal.col, 1, 1});
  return intersect(expand(w, margin), map.grid().bounds());
}

/// Traversable mask with the dilated (but not raw obstacle) cells around
/// `agent` reopened, so an agent brushing a wall can still plan.
inline Mask agent_traversable_mask(const SpatialMap& map, Rect window, Cell agent,
                                   const PlannerParams& p) {
  Mask free = traversable_mask(map, window, p);
  const float thr = static_cast<float>(p.threshold);
  for (int dr = -p.dilation; dr <= p.dilation; ++dr) {
    for (int dc = -p.dilation; dc <= p.dilation; ++dc) {
      const Cell c{agent.row + dr, agent.col + dc};
      if (window.contains(c) && map.obstacle(c) < thr) {
        free(c.row - window.row0, c.col - window.col0) = 1;
      }
    }
  }
  return free;
}

/// Distance field to `goal` on the map's obstacle channel. When `agent` is
/// given, dilated (but not raw obstacle) cells around it are reopened so an
/// agent brushing a wall can still plan, and the solve stops once the agent
/// cell is final.
inline DistanceField plan_field(const SpatialMap& map, Cell goal, std::optional<Cell> agent,
                                Rect known, const PlannerParams& p = {}) {
  if (!map.in_bounds(goal)) {
    throw InvalidArgument("fmm: goal " + to_string(goal) + " outside the map");
  }
  const Rect w = planning_window(map, known, agent.value_or(goal), goal, p.window_margin);
  FmmOptions opt;
  if (agent && w.contains(*agent)) {
    opt.stop_at = agent;
    return fmm(agent_traversable_mask(map, w, *agent, p), goal, w, map.resolution(), opt);
  }
  return fmm(traversable_mask(map, w, p), goal, w, map.resolution(), opt);
}

struct PlanResult {
  std::vector<Cell> path;  // agent to goal
  Cell short_term_goal;
  bool reachable = false;
  double length = 0.0;  // metres along the path
};

/// Steepest descent on the field from `start`: each step moves to the
/// 8-neighbour with the smallest travel time below the current one; equal
/// values go to the neighbour nearest the source, then the smaller (row, col).
inline PlanResult extract_path(const DistanceField& f, Cell start,
                               double short_term = kShortTermGoalDistance) {
  PlanResult out;
  out.short_term_goal = start;
  if (!(f.at(start) < kInf)) return out;
  out.reachable = true;
  out.path.push_back(start);
  Cell cur = start;
  const Mask& m = f.traversable;
  double along = 0.0;
  while (f.at(cur) > 0.0) {
    const int lr = cur.row - f.window.row0;
    const int lc = cur.col - f.window.col0;
    const double here = f.at(cur);
    std::optional<Cell> best;
    double best_t = here;
    double best_d = kInf;
    for (int k = 0; k < 8; ++k) {
      const int dr = detail::kDr8[k];
      const int dc = detail::kDc8[k];
      const Cell n{cur.row + dr, cur.col + dc};
      if (dr != 0 && dc != 0 && !detail::diagonal_open(m, lr, lc, dr, dc)) continue;
      const double t = f.at(n);
      if (!(t < here)) continue;
      const double gd = std::hypot(n.row - f.source.row, n.col - f.source.col);
      if (!best || t < best_t || (t == best_t && (gd < best_d || (gd == best_d && n < *best)))) {
        best = n;
        best_t = t;
        best_d = gd;
      }
    }
    if (!best) break;  // cannot happen on a finished field
    along += (best->row != cur.row && best->col != cur.col) ? std::sqrt(2.0) * f.h : f.h;
    cur = *best;
    out.path.push_back(cur);
    if (along <= short_term + 1e-9) out.short_term_goal = cur;
  }
  out.length = along;
  return out;
}

/// Geodesic distance in metres between two cells of a free-space mask
/// (1 = free); +infinity when disconnected.
inline double geodesic_distance(const Mask& free, Cell a, Cell b, double h = kCellSize) {
  if (!free.in_bounds(a) || !free.in_bounds(b)) {
    throw InvalidArgument("geodesic_distance: cell outside the grid");
  }
  if (a == b) return 0.0;
  if (!free[a] || !free[b]) return kInf;
  FmmOptions opt;
  opt.stop_at = b;
  const DistanceField f = fmm(free, a, h, opt);
  return f.at(b);
}

inline Mask free_mask(const Occupancy& occ) {
  Mask m(occ.rows(), occ.cols(), 0);
  for (int r = 0; r < occ.rows(); ++r) {
    for (int c = 0; c < occ.cols(); ++c) m(r, c) = occ(r, c) ? 0 : 1;
  }
  return m;
}

}  // namespace ans
