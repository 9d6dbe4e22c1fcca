#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "ans/errors.hpp"
#include "ans/grid.hpp"

namespace ans {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi]. Angles already in range are returned
/// untouched so that identity compositions stay bit exact.
inline double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  double w = std::atan2(std::sin(a), std::cos(a));
  if (w <= -kPi) w = kPi;
  return w;
}

/// Agent pose in a planar frame: metres, radians counter-clockwise from +x.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Relative motion expressed in the frame of the earlier pose.
struct PoseDelta {
  double dx = 0.0;
  double dy = 0.0;
  double dtheta = 0.0;

  double translation() const { return std::hypot(dx, dy); }
  bool is_zero() const { return dx == 0.0 && dy == 0.0 && dtheta == 0.0; }

  friend bool operator==(const PoseDelta&, const PoseDelta&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_finite(const Pose& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
}
inline bool is_finite(const PoseDelta& d) {
  return std::isfinite(d.dx) && std::isfinite(d.dy) &&
         std::isfinite(d.dtheta);
}

namespace detail {
template <typename T>
void require_finite(const T& v, const char* what) {
  if (!is_finite(v)) {
    throw InvalidArgument(std::string(what) + ": non-finite pose component");
  }
}
}  // namespace detail

inline Pose make_pose(double x, double y, double theta) {
  Pose p{x, y, wrap_angle(theta)};
  detail::require_finite(p, "make_pose");
  return p;
}

inline PoseDelta make_delta(double dx, double dy, double dtheta) {
  PoseDelta d{dx, dy, wrap_angle(dtheta)};
  detail::require_finite(d, "make_delta");
  return d;
}

/// base (+) delta: the delta translation is rotated into the base frame.
inline Pose compose(const Pose& base, const PoseDelta& delta) {
  detail::require_finite(base, "compose");
  detail::require_finite(delta, "compose");
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  return {base.x + c * delta.dx - s * delta.dy,
          base.y + s * delta.dx + c * delta.dy,
          wrap_angle(base.theta + delta.dtheta)};
}

/// Chains two relative motions: the second is expressed in the frame reached
/// after the first.
inline PoseDelta compose(const PoseDelta& first, const PoseDelta& second) {
  const Pose p = compose(Pose{first.dx, first.dy, first.dtheta}, second);
  return {p.x, p.y, p.theta};
}

/// Relative motion taking a to b, so that compose(a, between(a, b)) == b.
inline PoseDelta between(const Pose& a, const Pose& b) {
  detail::require_finite(a, "between");
  detail::require_finite(b, "between");
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  return {c * ex + s * ey, -s * ex + c * ey, wrap_angle(b.theta - a.theta)};
}

inline PoseDelta inverse(const PoseDelta& d) {
  detail::require_finite(d, "inverse");
  const double c = std::cos(d.dtheta);
  const double s = std::sin(d.dtheta);
  return {-(c * d.dx + s * d.dy), -(-s * d.dx + c * d.dy),
          wrap_angle(-d.dtheta)};
}

inline Point2 to_world(const Pose& frame, Point2 local) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return {frame.x + c * local.x - s * local.y,
          frame.y + s * local.x + c * local.y};
}

inline Point2 to_local(const Pose& frame, Point2 world) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  const double ex = world.x - frame.x;
  const double ey = world.y - frame.y;
  return {c * ex + s * ey, -s * ex + c * ey};
}

inline double distance(const Pose& a, const Pose& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Resampling parameters for a grid: the delta is the pose of the output
/// frame relative to the input frame, both anchored at the grid centre.
struct GridTransform {
  double resolution = kCellSize;
  PoseDelta delta;
};

/// Bilinear read of one channel at fractional (row, col) with zero padding.
inline double sample_bilinear(const ChannelGrid& g, int ch, double row,
                              double col) {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const double fr = row - r0f;
  const double fc = col - c0f;
  const int r0 = static_cast<int>(r0f);
  const int c0 = static_cast<int>(c0f);
  auto at = [&](int r, int c) -> double {
    return g.in_bounds(r, c) ? g.at(ch, r, c) : 0.0;
  };
  double v = 0.0;
  if (fr == 0.0 && fc == 0.0) return at(r0, c0);
  v += (1.0 - fr) * (1.0 - fc) * at(r0, c0);
  v += (1.0 - fr) * fc * at(r0, c0 + 1);
  v += fr * (1.0 - fc) * at(r0 + 1, c0);
  v += fr * fc * at(r0 + 1, c0 + 1);
  return v;
}

/// Resamples every channel of `map` under `t` by inverse bilinear mapping.
/// Grid frame: origin at the grid centre, +x along columns, +y up the rows.
/// Output cell q reads the input at t.delta (+) q; samples falling outside
/// the source read zero.
inline ChannelGrid spatial_transform(const ChannelGrid& map,
                                     const GridTransform& t) {
  if (!(t.resolution > 0.0) || !std::isfinite(t.resolution)) {
    throw InvalidArgument("spatial_transform: resolution must be positive");
  }
  detail::require_finite(t.delta, "spatial_transform");
  require_unit_interval(map, "spatial_transform");
  if (t.delta.is_zero()) return map;

  ChannelGrid out(map.channels(), map.rows(), map.cols());
  const double cx = (map.cols() - 1) / 2.0;
  const double cy = (map.rows() - 1) / 2.0;
  const double c = std::cos(t.delta.dtheta);
  const double s = std::sin(t.delta.dtheta);
  const double tx = t.delta.dx / t.resolution;
  const double ty = t.delta.dy / t.resolution;
  for (int r = 0; r < map.rows(); ++r) {
    const double y = cy - r;
    for (int col = 0; col < map.cols(); ++col) {
      const double x = col - cx;
      const double sx = tx + c * x - s * y;
      const double sy = ty + s * x + c * y;
      const double src_col = sx + cx;
      const double src_row = cy - sy;
      for (int ch = 0; ch < map.channels(); ++ch) {
        const double v = sample_bilinear(map, ch, src_row, src_col);
        out.at(ch, r, col) = static_cast<float>(std::min(1.0, v));
      }
    }
  }
  return out;
}

}  // namespace ans
