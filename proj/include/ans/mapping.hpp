#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/grid.hpp"
#include "ans/world.hpp"

namespace ans {

inline constexpr int kEgoSize = 64;
inline constexpr int kObstacleChannel = 0;
inline constexpr int kExploredChannel = 1;

// 2 x V x V, agent at cell (V-1, V/2) looking toward row 0. Ego cell
// (V-1-k, V/2-m) is centred k cells ahead and m cells to the left.
using EgoMap = ChannelGrid;

inline EgoMap make_ego(int size = kEgoSize) { return EgoMap(2, size, size); }

/// Fractional ego (row, col) of a point given in the agent frame (forward,
/// left), in metres.
inline Point2 ego_coords(double forward, double left, int size = kEgoSize,
                         double res = kCellSize) {
  return {(size - 1) - forward / res, size / 2 - left / res};
}

/// Analytic projection of a scan: cells along each ray are explored, the
/// cell holding a ray's hit point is an obstacle.
inline EgoMap project_ego(const RangeScan& scan, int size = kEgoSize,
                          double res = kCellSize) {
  if (scan.size() == 0) throw InvalidArgument("project_ego: empty scan");
  if (scan.bearings.size() != scan.size() || scan.hits.size() != scan.size()) {
    throw InvalidArgument("project_ego: scan arrays differ in length");
  }
  if (scan.max_range > size * res + 1e-12) {
    throw InvalidArgument("project_ego: max range exceeds the ego map");
  }
  EgoMap ego = make_ego(size);
  auto mark = [&](double f, double l, bool obstacle) {
    const Point2 e = ego_coords(f, l, size, res);
    const int r = static_cast<int>(std::floor(e.x + 0.5));
    const int c = static_cast<int>(std::floor(e.y + 0.5));
    if (!ego.in_bounds(r, c)) return;
    ego.at(kExploredChannel, r, c) = 1.0F;
    if (obstacle) ego.at(kObstacleChannel, r, c) = 1.0F;
  };
  const double step = res / 4.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double range = std::min(scan.ranges[i], scan.max_range);
    const double cb = std::cos(scan.bearings[i]);
    const double sb = std::sin(scan.bearings[i]);
    const int n = static_cast<int>(std::floor(range / step));
    for (int k = 0; k <= n; ++k) mark(k * step * cb, k * step * sb, false);
    mark(range * cb, range * sb, scan.hits[i] != 0);
  }
  return ego;
}

/// Geocentric 2-channel map. Map cell (r, c) is centred at (c, r) * res in
/// the map frame; the episode starts at cell (M/2, M/2) facing +x.
class SpatialMap {
 public:
  explicit SpatialMap(int size = 960, double res = kCellSize)
      : grid_(2, size, size), res_(res) {
    if (size < 2) throw InvalidArgument("spatial map size must be >= 2");
  }

  int size() const { return grid_.rows(); }
  double resolution() const { return res_; }
  const ChannelGrid& grid() const { return grid_; }
  ChannelGrid& grid() { return grid_; }

  float obstacle(int r, int c) const { return grid_.at(kObstacleChannel, r, c); }
  float explored(int r, int c) const { return grid_.at(kExploredChannel, r, c); }
  float obstacle(Cell c) const { return obstacle(c.row, c.col); }
  float explored(Cell c) const { return explored(c.row, c.col); }
  bool in_bounds(Cell c) const { return grid_.in_bounds(c.row, c.col); }

  Pose origin() const {
    const double o = (size() / 2) * res_;
    return {o, o, 0.0};
  }

  Cell cell_of(double x, double y) const {
    return {static_cast<int>(std::floor(y / res_ + 0.5)),
            static_cast<int>(std::floor(x / res_ + 0.5))};
  }
  Cell cell_of(const Pose& p) const { return cell_of(p.x, p.y); }
  Point2 center(Cell c) const { return {c.col * res_, c.row * res_}; }

  friend bool operator==(const SpatialMap&, const SpatialMap&) = default;

 private:
  ChannelGrid grid_;
  double res_;
};

/// Places `ego` into the map at `pose` by inverse bilinear sampling and keeps
/// the per-cell, per-channel maximum with what is already there. Returns the
/// map rectangle that was touched.
inline Rect aggregate_into(SpatialMap& map, const EgoMap& ego, const Pose& pose) {
  detail::require_finite(pose, "aggregate");
  const Cell at = map.cell_of(pose);
  if (!map.in_bounds(at)) {
    throw OutOfBounds("aggregate: pose " + to_string(at) + " lies outside the map");
  }
  const double res = map.resolution();
  const int v = ego.rows();
  // Bounding box of the ego patch corners in map cells.
  double rmin = 1e300, rmax = -1e300, cmin = 1e300, cmax = -1e300;
  for (double er : {-1.0, double(v)}) {
    for (double ec : {-1.0, double(v)}) {
      const double f = ((v - 1) - er) * res;
      const double l = (v / 2 - ec) * res;
      const Point2 w = to_world(pose, {f, l});
      rmin = std::min(rmin, w.y / res);
      rmax = std::max(rmax, w.y / res);
      cmin = std::min(cmin, w.x / res);
      cmax = std::max(cmax, w.x / res);
    }
  }
  const Rect box = intersect(
      Rect{static_cast<int>(std::floor(rmin)), static_cast<int>(std::floor(cmin)),
           static_cast<int>(std::ceil(rmax) - std::floor(rmin)) + 1,
           static_cast<int>(std::ceil(cmax) - std::floor(cmin)) + 1},
      map.grid().bounds());
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  ChannelGrid& g = map.grid();
  for (int r = box.row0; r < box.row_end(); ++r) {
    const double ey = r * res - pose.y;
    for (int col = box.col0; col < box.col_end(); ++col) {
      const double ex = col * res - pose.x;
      const double f = c * ex + s * ey;
      const double l = -s * ex + c * ey;
      const double er = (v - 1) - f / res;
      const double ec = v / 2 - l / res;
      if (er <= -1.0 || ec <= -1.0 || er >= v || ec >= v) continue;
      for (int ch = 0; ch < 2; ++ch) {
        const float val = static_cast<float>(std::min(1.0, sample_bilinear(ego, ch, er, ec)));
        float& cell = g.at(ch, r, col);
        if (val > cell) cell = val;
      }
    }
  }
  return box;
}

inline SpatialMap aggregate(const SpatialMap& prev, const EgoMap& ego, const Pose& pose) {
  SpatialMap out = prev;
  aggregate_into(out, ego, pose);
  return out;
}

struct PredictedCoverage {
  double area_m2 = 0.0;       // explored cells
  double free_area_m2 = 0.0;  // explored and not obstacle
};

inline PredictedCoverage predicted_coverage(const SpatialMap& map) {
  std::size_t explored = 0;
  std::size_t free = 0;
  const auto obs = map.grid().channel(kObstacleChannel);
  const auto exp = map.grid().channel(kExploredChannel);
  for (std::size_t i = 0; i < exp.size(); ++i) {
    if (exp[i] > 0.5F) {
      ++explored;
      if (obs[i] < 0.5F) ++free;
    }
  }
  const double a = map.resolution() * map.resolution();
  return {static_cast<double>(explored) * a, static_cast<double>(free) * a};
}

}  // namespace ans
