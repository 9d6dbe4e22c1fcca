#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "ans/geometry.hpp"
#include "ans/grid.hpp"
#include "ans/mapping.hpp"

namespace ans {

/// Discrete search box around the sensed delta. Both radii are multiples of
/// their steps.
struct PoseSearch {
  double r_xy = 0.1;
  double r_o = deg2rad(5.0);
  double step_xy = 0.025;
  double step_o = deg2rad(0.5);
  double explored_weight = 0.0;
  // Penalty for an obstacle cell in one map landing on a known-free cell of
  // the other. Without it the raw product favours offsets that merely
  // increase the overlap of the two fields of view.
  double mismatch_weight = 0.5;
  // Score charged per squared search step away from the sensed delta.
  double prior_xy = 2.0;
  double prior_o = 0.1;

  int n_xy() const { return static_cast<int>(std::lround(r_xy / step_xy)); }
  int n_o() const { return static_cast<int>(std::lround(r_o / step_o)); }
};

/// Pose of the ego agent cell in the ego grid's centred frame (metres).
inline Pose ego_agent_frame(int size = kEgoSize, double res = kCellSize) {
  const double centre = (size - 1) / 2.0;
  return {(size / 2 - centre) * res, (centre - (size - 1)) * res, kPi / 2.0};
}

/// Re-expresses the previous ego map in the current agent frame, where `d`
/// is the current pose relative to the previous one.
inline EgoMap ego_transform(const EgoMap& prev, const PoseDelta& d,
                            double res = kCellSize) {
  const Pose a = ego_agent_frame(prev.rows(), res);
  const PoseDelta a_d{a.x, a.y, a.theta};
  const PoseDelta conj = compose(compose(a_d, d), inverse(a_d));
  return spatial_transform(prev, {res, conj});
}

/// Alignment of two consecutive ego maps under `d`: the weighted inner
/// product of the transformed previous map with the current one, less the
/// obstacle-on-free mismatch in both directions. Free is explored minus
/// obstacle.
inline double alignment_score(const EgoMap& prev, const EgoMap& cur,
                              const PoseDelta& d, const PoseSearch& w = {},
                              double res = kCellSize) {
  const EgoMap moved = ego_transform(prev, d, res);
  double s = 0.0;
  const auto m0 = moved.channel(kObstacleChannel);
  const auto m1 = moved.channel(kExploredChannel);
  const auto c0 = cur.channel(kObstacleChannel);
  const auto c1 = cur.channel(kExploredChannel);
  for (std::size_t i = 0; i < c0.size(); ++i) {
    const double free_m = double(m1[i]) - m0[i];
    const double free_c = double(c1[i]) - c0[i];
    s += double(m0[i]) * c0[i] + w.explored_weight * double(m1[i]) * c1[i] -
         w.mismatch_weight * (double(m0[i]) * free_c + free_m * c0[i]);
  }
  return s;
}

struct DeltaEstimate {
  PoseDelta delta;
  double score = 0.0;
  double sensed_score = 0.0;
  int ix = 0, iy = 0, io = 0;  // chosen offset in search steps
  bool corrected = false;
};

namespace detail {

// Bilinear resampling of one ego channel onto a lattice `factor` times
// finer, with `pad` fine cells of zero-padded margin on every side. Bilinear
// reads of this lattice reproduce bilinear reads of the source exactly.
struct FineLattice {
  int factor = 1;
  int pad = 0;
  int rows = 0, cols = 0;
  std::vector<float> v;

  float at(int r, int c) const {
    if (r < 0 || c < 0 || r >= rows || c >= cols) return 0.0F;
    return v[static_cast<std::size_t>(r) * cols + c];
  }
};

// Lattice of a0 * channel 0 + a1 * channel 1.
inline FineLattice make_lattice(const EgoMap& g, double a0, double a1, int factor, int pad) {
  FineLattice lat;
  lat.factor = factor;
  lat.pad = pad;
  lat.rows = (g.rows() - 1) * factor + 1 + 2 * pad;
  lat.cols = (g.cols() - 1) * factor + 1 + 2 * pad;
  lat.v.assign(static_cast<std::size_t>(lat.rows) * lat.cols, 0.0F);
  for (int r = 0; r < lat.rows; ++r) {
    const double sr = double(r - pad) / factor;
    if (sr <= -1.0 || sr >= g.rows()) continue;
    for (int c = 0; c < lat.cols; ++c) {
      const double sc = double(c - pad) / factor;
      if (sc <= -1.0 || sc >= g.cols()) continue;
      double x = 0.0;
      if (a0 != 0.0) x += a0 * sample_bilinear(g, 0, sr, sc);
      if (a1 != 0.0) x += a1 * sample_bilinear(g, 1, sr, sc);
      lat.v[static_cast<std::size_t>(r) * lat.cols + c] = static_cast<float>(x);
    }
  }
  return lat;
}

// Adds coef * bilinear(lat, r0 + fr + t, c0 + fc + u) into acc[t + n][u + n]
// for all |t|, |u| <= n.
inline void accumulate_window(const FineLattice& lat, int r0, int c0, double fr,
                              double fc, double coef, int n, double* acc) {
  const int w = 2 * n + 1;
  const double w00 = coef * (1.0 - fr) * (1.0 - fc);
  const double w01 = coef * (1.0 - fr) * fc;
  const double w10 = coef * fr * (1.0 - fc);
  const double w11 = coef * fr * fc;
  const bool inside = r0 - n >= 0 && c0 - n >= 0 && r0 + n + 1 < lat.rows &&
                      c0 + n + 1 < lat.cols;
  if (inside) {
    for (int t = -n; t <= n; ++t) {
      const float* a = lat.v.data() + static_cast<std::size_t>(r0 + t) * lat.cols + (c0 - n);
      const float* b = a + lat.cols;
      double* out = acc + (t + n) * w;
      for (int u = 0; u < w; ++u) {
        out[u] += w00 * a[u] + w01 * a[u + 1] + w10 * b[u] + w11 * b[u + 1];
      }
    }
    return;
  }
  if (r0 + n + 1 < 0 || c0 + n + 1 < 0 || r0 - n >= lat.rows || c0 - n >= lat.cols) {
    return;
  }
  for (int t = -n; t <= n; ++t) {
    for (int u = -n; u <= n; ++u) {
      const int r = r0 + t;
      const int c = c0 + u;
      acc[(t + n) * w + (u + n)] += w00 * lat.at(r, c) + w01 * lat.at(r, c + 1) +
                                    w10 * lat.at(r + 1, c) + w11 * lat.at(r + 1, c + 1);
    }
  }
}

}  // namespace detail

/// Exhaustive search for the delta in the box around `sensed` that best
/// aligns the previous ego map with the current one. Ties go to the offset
/// with the smallest squared step index norm, then lexicographically on
/// (x, y, theta) steps. The sensed delta is kept unless beaten by more than
/// 1e-9, and when either map is empty.
inline DeltaEstimate estimate_delta_detailed(const EgoMap& prev, const EgoMap& cur,
                                             const PoseDelta& sensed,
                                             const PoseSearch& search = {},
                                             double res = kCellSize) {
  DeltaEstimate out;
  out.delta = sensed;
  if (prev.all_zero() || cur.all_zero()) return out;
  if (prev.rows() != cur.rows() || prev.cols() != cur.cols()) {
    throw InvalidArgument("estimate_delta: ego maps differ in size");
  }
  const int n = search.n_xy();
  const int no = search.n_o();
  const int w = 2 * n + 1;
  const int v = cur.rows();

  // The translation lattice must be a whole refinement of the map grid.
  const double ratio = res / search.step_xy;
  const int factor = static_cast<int>(std::lround(ratio));
  const bool lattice_ok = n > 0 && factor >= 1 && std::abs(ratio - factor) < 1e-9;

  // scores[k][ix][iy] with ix, iy in [0, 2n], k in [0, 2no].
  std::vector<double> scores(static_cast<std::size_t>((2 * no + 1) * w * w), 0.0);
  auto score_at = [&](int k, int ix, int iy) -> double& {
    return scores[static_cast<std::size_t>((k * w + ix) * w + iy)];
  };

  if (lattice_ok) {
    const int pad = factor + n + 2;
    // Binary ego maps have at most three cell kinds, so each kind gets one
    // lattice that already mixes both channels with its coefficients.
    // Anything with more kinds uses one lattice per channel.
    struct Src {
      double f, l;
      int kind;
    };
    std::vector<std::array<double, 2>> kinds;
    std::vector<Src> cells;
    bool per_channel = false;
    for (int r = 0; r < v; ++r) {
      for (int c = 0; c < cur.cols(); ++c) {
        const double o = cur.at(kObstacleChannel, r, c);
        const double e = cur.at(kExploredChannel, r, c);
        if (o == 0.0 && e == 0.0) continue;
        // Coefficients of the bilinear reads of the previous map.
        const double lam = search.mismatch_weight;
        const std::array<double, 2> a{o * (1.0 + lam) - lam * (e - o),
                                      search.explored_weight * e - lam * o};
        int kind = 0;
        while (kind < static_cast<int>(kinds.size()) && kinds[kind] != a) ++kind;
        if (kind == static_cast<int>(kinds.size())) kinds.push_back(a);
        cells.push_back({((v - 1) - r) * res, (v / 2 - c) * res, kind});
      }
    }
    per_channel = kinds.size() > 4;
    std::vector<detail::FineLattice> lats;
    if (per_channel) {
      lats.push_back(detail::make_lattice(prev, 1.0, 0.0, factor, pad));
      lats.push_back(detail::make_lattice(prev, 0.0, 1.0, factor, pad));
    } else {
      for (const auto& a : kinds) lats.push_back(detail::make_lattice(prev, a[0], a[1], factor, pad));
    }
    std::vector<double> acc(static_cast<std::size_t>(w * w));
    for (int k = -no; k <= no; ++k) {
      const double th = sensed.dtheta + k * search.step_o;
      const double cs = std::cos(th);
      const double sn = std::sin(th);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const Src& q : cells) {
        const double f = sensed.dx + cs * q.f - sn * q.l;
        const double l = sensed.dy + sn * q.f + cs * q.l;
        // Fine-lattice position for zero offset; +x steps move up the rows,
        // +y steps move left along the columns.
        const double ur = ((v - 1) - f / res) * factor + pad;
        const double uc = (v / 2 - l / res) * factor + pad;
        const double rf = std::floor(ur);
        const double cf = std::floor(uc);
        const int r0 = static_cast<int>(rf);
        const int c0 = static_cast<int>(cf);
        if (!per_channel) {
          detail::accumulate_window(lats[q.kind], r0, c0, ur - rf, uc - cf, 1.0, n, acc.data());
          continue;
        }
        const auto& a = kinds[q.kind];
        if (a[0] != 0.0) {
          detail::accumulate_window(lats[0], r0, c0, ur - rf, uc - cf, a[0], n, acc.data());
        }
        if (a[1] != 0.0) {
          detail::accumulate_window(lats[1], r0, c0, ur - rf, uc - cf, a[1], n, acc.data());
        }
      }
      // acc[t][u] holds the offset with ix = -t, iy = -u.
      for (int t = -n; t <= n; ++t) {
        for (int u = -n; u <= n; ++u) {
          score_at(k + no, -t + n, -u + n) = acc[static_cast<std::size_t>((t + n) * w + (u + n))];
        }
      }
    }
  } else {
    for (int k = -no; k <= no; ++k) {
      for (int ix = -n; ix <= n; ++ix) {
        for (int iy = -n; iy <= n; ++iy) {
          const PoseDelta d{sensed.dx + ix * search.step_xy,
                            sensed.dy + iy * search.step_xy,
                            sensed.dtheta + k * search.step_o};
          score_at(k + no, ix + n, iy + n) =
              alignment_score(prev, cur, d, search, res);
        }
      }
    }
  }

  out.sensed_score = score_at(no, n, n);
  // Candidates compete on score minus the step prior; the sensed delta has
  // no prior cost, so the winner never scores below it.
  auto norm2 = [](int a, int b, int c) { return a * a + b * b + c * c; };
  double best = out.sensed_score;
  int bx = 0, by = 0, bo = 0;
  for (int ix = -n; ix <= n; ++ix) {
    for (int iy = -n; iy <= n; ++iy) {
      for (int k = -no; k <= no; ++k) {
        const double s = score_at(k + no, ix + n, iy + n) -
                         search.prior_xy * (ix * ix + iy * iy) - search.prior_o * k * k;
        const double tol = 1e-9 * std::max(1.0, std::abs(best));
        if (s > best + tol) {
          best = s;
          bx = ix, by = iy, bo = k;
        } else if (s >= best - tol) {
          // Iteration order is already lexicographic, so only a strictly
          // smaller norm replaces the incumbent.
          if (norm2(ix, iy, k) < norm2(bx, by, bo)) {
            best = std::max(best, s);
            bx = ix, by = iy, bo = k;
          }
        }
      }
    }
  }
  out.score = score_at(bo + no, bx + n, by + n);
  if (best <= out.sensed_score + 1e-9 || (bx == 0 && by == 0 && bo == 0)) {
    out.score = out.sensed_score;
    return out;
  }
  out.delta = {sensed.dx + bx * search.step_xy, sensed.dy + by * search.step_xy,
               wrap_angle(sensed.dtheta + bo * search.step_o)};
  out.ix = bx;
  out.iy = by;
  out.io = bo;
  out.corrected = true;
  return out;
}

inline PoseDelta estimate_delta(const EgoMap& prev, const EgoMap& cur,
                                const PoseDelta& sensed, const PoseSearch& search = {}) {
  return estimate_delta_detailed(prev, cur, sensed, search).delta;
}

/// Egocentric crop of the geocentric map seen from `pose`, thresholded at
/// 0.5 per channel: the ego grid the map predicts for that pose.
inline EgoMap map_view(const SpatialMap& map, const Pose& pose, int size = kEgoSize) {
  EgoMap out = make_ego(size);
  const double res = map.resolution();
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const Point2 w = to_world(pose, {((size - 1) - r) * res, (size / 2 - c) * res});
      for (int ch = 0; ch < 2; ++ch) {
        if (sample_bilinear(map.grid(), ch, w.y / res, w.x / res) >= 0.5) out.at(ch, r, c) = 1.0F;
      }
    }
  }
  return out;
}

/// Running pose estimate: last ego map, estimate and sensor pose.
struct SlamState {
  std::optional<EgoMap> prev_ego;
  Pose estimate;
  Pose last_sensor;
  bool correct = true;
  // Register against the map's view from the last estimate instead of the
  // last ego map when the caller passes the map.
  bool map_reference = true;
  PoseSearch search;
};

inline SlamState make_slam_state(const Pose& origin, bool correct = true,
                                 const PoseSearch& search = {}) {
  SlamState s;
  s.estimate = origin;
  s.last_sensor = origin;
  s.correct = correct;
  s.search = search;
  return s;
}

/// Advances the estimate by the (optionally corrected) sensed delta. `map`,
/// when given, is the map built from every earlier view.
inline Pose slam_update(SlamState& state, const EgoMap& cur, const Pose& sensor_pose,
                        const SpatialMap* map = nullptr) {
  const PoseDelta sensed = between(state.last_sensor, sensor_pose);
  PoseDelta d = sensed;
  if (state.correct && state.prev_ego) {
    if (map && state.map_reference) {
      d = estimate_delta(map_view(*map, state.estimate, cur.rows()), cur, sensed, state.search);
    } else {
      d = estimate_delta(*state.prev_ego, cur, sensed, state.search);
    }
  }
  if (state.prev_ego) state.estimate = compose(state.estimate, d);
  state.prev_ego = cur;
  state.last_sensor = sensor_pose;
  return state.estimate;
}

}  // namespace ans
