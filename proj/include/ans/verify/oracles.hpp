#pragma once

// Slow reference computations used to check the fast paths.

#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <vector>

#include "ans/geometry.hpp"
#include "ans/grid.hpp"
#include "ans/mapping.hpp"

namespace ans::verify {

/// 8-connected Dijkstra from `source` over `free` (1 = passable), edge
/// lengths h and sqrt(2) h. Diagonal moves need both orthogonal cells free.
inline Grid<double> dijkstra8(const Grid<std::uint8_t>& free, Cell source, double h) {
  const double inf = std::numeric_limits<double>::infinity();
  Grid<double> d(free.rows(), free.cols(), inf);
  if (!free.in_bounds(source)) return d;
  using Item = std::pair<double, std::pair<int, int>>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[source] = 0.0;
  pq.push({0.0, {source.row, source.col}});
  while (!pq.empty()) {
    const auto [dist, rc] = pq.top();
    pq.pop();
    const auto [r, c] = rc;
    if (dist > d(r, c)) continue;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (!dr && !dc) continue;
        const int nr = r + dr, nc = c + dc;
        if (!free.in_bounds(nr, nc) || !free(nr, nc)) continue;
        if (dr && dc && !(free(r + dr, c) && free(r, c + dc))) continue;
        const double nd = dist + ((dr && dc) ? std::sqrt(2.0) * h : h);
        if (nd < d(nr, nc)) {
          d(nr, nc) = nd;
          pq.push({nd, {nr, nc}});
        }
      }
    }
  }
  return d;
}

/// Union-find labelling of 4-connected free cells (1 = free); returns a
/// representative per cell, -1 on blocked cells.
inline std::vector<int> component_roots(const Grid<std::uint8_t>& free) {
  std::vector<int> parent(free.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < free.rows(); ++r) {
    for (int c = 0; c < free.cols(); ++c) {
      if (!free(r, c)) continue;
      const int i = static_cast<int>(free.index(r, c));
      if (r + 1 < free.rows() && free(r + 1, c)) parent[find(i)] = find(static_cast<int>(free.index(r + 1, c)));
      if (c + 1 < free.cols() && free(r, c + 1)) parent[find(i)] = find(static_cast<int>(free.index(r, c + 1)));
    }
  }
  std::vector<int> roots(free.size(), -1);
  for (int r = 0; r < free.rows(); ++r) {
    for (int c = 0; c < free.cols(); ++c) {
      if (free(r, c)) roots[free.index(r, c)] = find(static_cast<int>(free.index(r, c)));
    }
  }
  return roots;
}

/// Direct evaluation of the ego alignment score: every current cell reads
/// the previous map at the point it occupied in the previous frame. Free is
/// explored minus obstacle on both sides.
inline double alignment_score_direct(const EgoMap& prev, const EgoMap& cur, const PoseDelta& d,
                                     double explored_weight = 0.5, double mismatch_weight = 1.0,
                                     double res = kCellSize) {
  const int v = cur.rows();
  auto read = [&](int ch, double row, double col) {
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    double acc = 0.0;
    for (int i = 0; i <= 1; ++i) {
      for (int j = 0; j <= 1; ++j) {
        const double w = (i ? row - r0 : 1.0 - (row - r0)) * (j ? col - c0 : 1.0 - (col - c0));
        const int r = r0 + i, c = c0 + j;
        if (w != 0.0 && r >= 0 && c >= 0 && r < v && c < v) acc += w * prev.at(ch, r, c);
      }
    }
    return acc;
  };
  const double cs = std::cos(d.dtheta), sn = std::sin(d.dtheta);
  double s = 0.0;
  for (int r = 0; r < v; ++r) {
    for (int c = 0; c < v; ++c) {
      const float a0 = cur.at(kObstacleChannel, r, c);
      const float a1 = cur.at(kExploredChannel, r, c);
      if (a0 == 0.0F && a1 == 0.0F) continue;
      const double f = ((v - 1) - r) * res;
      const double l = (v / 2 - c) * res;
      const double pf = d.dx + cs * f - sn * l;
      const double pl = d.dy + sn * f + cs * l;
      const double row = (v - 1) - pf / res;
      const double col = v / 2 - pl / res;
      const double p0 = read(kObstacleChannel, row, col);
      const double p1 = read(kExploredChannel, row, col);
      s += a0 * p0 + explored_weight * a1 * p1 -
           mismatch_weight * (p0 * (a1 - a0) + (p1 - p0) * a0);
    }
  }
  return s;
}

}  // namespace ans::verify
