#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ans/action.hpp"
#include "ans/errors.hpp"
#include "ans/geometry.hpp"
#include "ans/grid.hpp"
#include "ans/io.hpp"
#include "ans/noise.hpp"

namespace ans {

inline constexpr double kAgentRadius = 0.1;
inline constexpr double kStartClearance = 0.15;
inline constexpr double kMarchStep = 0.005;

using Occupancy = Grid<std::uint8_t>;  // 1 = obstacle
using CellMask = Grid<std::uint8_t>;

/// Ground-truth occupancy with the agent's true pose and the set of cells
/// observed so far. Cell (r, c) covers [c, c+1) x [r, r+1) in units of the
/// resolution, so rows run along +y.
class GridWorld {
 public:
  GridWorld() = default;

  explicit GridWorld(Occupancy occupancy, double resolution = kCellSize)
      : occ_(std::move(occupancy)),
        seen_(occ_.rows(), occ_.cols(), 0),
        resolution_(resolution) {
    if (std::abs(resolution - kCellSize) > 1e-12) {
      throw ValidationError("world resolution must be " +
                            format_double(kCellSize) + " m");
    }
    if (occ_.rows() < 3 || occ_.cols() < 3) {
      throw ValidationError("world must be at least 3x3 cells");
    }
    for (int r = 0; r < occ_.rows(); ++r) {
      for (int c = 0; c < occ_.cols(); ++c) {
        const bool border =
            r == 0 || c == 0 || r == occ_.rows() - 1 || c == occ_.cols() - 1;
        if (border && !occ_(r, c)) {
          throw ValidationError("world border must be closed; free cell at " +
                                to_string(Cell{r, c}));
        }
      }
    }
    seed_noise(0);
  }

  int rows() const { return occ_.rows(); }
  int cols() const { return occ_.cols(); }
  double resolution() const { return resolution_; }
  const Occupancy& occupancy() const { return occ_; }
  const CellMask& seen_mask() const { return seen_; }
  CellMask& seen_mask() { return seen_; }

  bool is_obstacle(int r, int c) const { return !occ_.in_bounds(r, c) || occ_(r, c); }
  bool is_free(Cell c) const { return !is_obstacle(c.row, c.col); }

  Cell cell_of(double x, double y) const {
    return {static_cast<int>(std::floor(y / resolution_)),
            static_cast<int>(std::floor(x / resolution_))};
  }
  Cell cell_of(const Pose& p) const { return cell_of(p.x, p.y); }

  Pose cell_center(Cell c, double theta = 0.0) const {
    return {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_, theta};
  }

  /// Distance from (x, y) to the nearest obstacle cell, capped at `cap`.
  double clearance(double x, double y, double cap = kAgentRadius) const {
    const Cell here = cell_of(x, y);
    if (is_obstacle(here.row, here.col)) return 0.0;
    const int reach = static_cast<int>(std::ceil(cap / resolution_)) + 1;
    double best2 = cap * cap;
    for (int r = here.row - reach; r <= here.row + reach; ++r) {
      for (int c = here.col - reach; c <= here.col + reach; ++c) {
        if (!is_obstacle(r, c)) continue;
        const double x0 = c * resolution_;
        const double y0 = r * resolution_;
        const double dx = std::max({x0 - x, 0.0, x - (x0 + resolution_)});
        const double dy = std::max({y0 - y, 0.0, y - (y0 + resolution_)});
        best2 = std::min(best2, dx * dx + dy * dy);
      }
    }
    return std::sqrt(best2);
  }

  const Pose& agent() const { return agent_; }

  void set_agent(const Pose& p) {
    detail::require_finite(p, "set_agent");
    const Cell c = cell_of(p);
    if (!occ_.in_bounds(c) || occ_[c]) {
      throw InvalidArgument("agent pose " + to_string(c) + " is not on a free cell");
    }
    agent_ = {p.x, p.y, wrap_angle(p.theta)};
  }

  const std::optional<Pose>& start() const { return start_; }
  void set_start(const Pose& p) {
    set_agent(p);
    start_ = agent_;
  }

  /// Resets the agent to the start pose and clears the seen mask.
  void reset() {
    if (start_) agent_ = *start_;
    seen_.fill(0);
  }

  void seed_noise(std::uint64_t seed) {
    std::seed_seq a{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x61u};
    std::seed_seq s{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x73u};
    actuation_rng_.seed(a);
    sensor_rng_.seed(s);
  }
  std::mt19937_64& actuation_rng() { return actuation_rng_; }
  std::mt19937_64& sensor_rng() { return sensor_rng_; }

  std::size_t free_cell_count() const {
    return static_cast<std::size_t>(
        std::count(occ_.values().begin(), occ_.values().end(), 0));
  }

 private:
  Occupancy occ_;
  CellMask seen_;
  double resolution_ = kCellSize;
  Pose agent_;
  std::optional<Pose> start_;
  std::mt19937_64 actuation_rng_;
  std::mt19937_64 sensor_rng_;
};

// ---------------------------------------------------------------------------
// Motion and odometry

/// Moves the agent by the control command (plus actuation noise when
/// enabled). Translation is marched in small increments and stops before the
/// footprint would come closer to an obstacle than the agent radius; rotation
/// always applies. Returns the realised delta.
inline PoseDelta step(GridWorld& world, Action action,
                      const NoiseModelSet& noise, bool noise_enabled) {
  PoseDelta d = control_command(action);
  if (noise_enabled) {
    const PoseDelta e = noise.get(action, NoiseKind::Actuation).sample(world.actuation_rng());
    d = {d.dx + e.dx, d.dy + e.dy, wrap_angle(d.dtheta + e.dtheta)};
  }
  const Pose before = world.agent();
  const double c = std::cos(before.theta);
  const double s = std::sin(before.theta);
  const double tx = c * d.dx - s * d.dy;
  const double ty = s * d.dx + c * d.dy;
  const double len = std::hypot(tx, ty);
  double x = before.x;
  double y = before.y;
  if (len > 0.0) {
    // A start closer to a wall than the radius may not get any closer.
    const double need = std::min(kAgentRadius, world.clearance(before.x, before.y));
    const int n = static_cast<int>(std::ceil(len / kMarchStep));
    for (int i = 1; i <= n; ++i) {
      const double f = static_cast<double>(i) / n;
      const double nx = before.x + tx * f;
      const double ny = before.y + ty * f;
      if (world.clearance(nx, ny) < need) break;
      x = nx;
      y = ny;
    }
  }
  const Pose after{x, y, wrap_angle(before.theta + d.dtheta)};
  world.set_agent(after);
  return between(before, after);
}

/// Sensor reading of a realised delta: component-wise additive noise.
inline PoseDelta odometry(GridWorld& world, const PoseDelta& true_delta,
                          const NoiseModelSet& noise, bool enabled,
                          Action action) {
  if (!enabled) return true_delta;
  const PoseDelta e = noise.get(action, NoiseKind::Sensor).sample(world.sensor_rng());
  return {true_delta.dx + e.dx, true_delta.dy + e.dy,
          wrap_angle(true_delta.dtheta + e.dtheta)};
}

// ---------------------------------------------------------------------------
// Range sensing

struct ScanParams {
  double fov = kPi / 2.0;
  int n_rays = 128;
  double max_range = 3.2;
};

struct RangeScan {
  std::vector<double> bearings;  // agent frame, counter-clockwise positive
  std::vector<double> ranges;
  std::vector<std::uint8_t> hits;
  double max_range = 3.2;

  std::size_t size() const { return ranges.size(); }
};

/// Grid traversal of every ray from `pose`. Free cells crossed before the
/// ray ends and obstacle cells that stop a ray are marked in `seen` when it
/// is given.
inline RangeScan cast_scan(const GridWorld& world, const Pose& pose,
                           const ScanParams& params, CellMask* seen = nullptr) {
  if (params.n_rays < 1 || !(params.max_range > 0.0) || !(params.fov >= 0.0)) {
    throw InvalidArgument("range scan: bad parameters");
  }
  const double res = world.resolution();
  RangeScan scan;
  scan.max_range = params.max_range;
  scan.bearings.reserve(static_cast<std::size_t>(params.n_rays));
  for (int i = 0; i < params.n_rays; ++i) {
    const double b = params.n_rays == 1
                         ? 0.0
                         : -params.fov / 2.0 + i * params.fov / (params.n_rays - 1);
    scan.bearings.push_back(b);
  }
  const double gx = pose.x / res;
  const double gy = pose.y / res;
  for (double b : scan.bearings) {
    const double a = pose.theta + b;
    const double dx = std::cos(a);
    const double dy = std::sin(a);
    int col = static_cast<int>(std::floor(gx));
    int row = static_cast<int>(std::floor(gy));
    const int step_c = dx > 0 ? 1 : -1;
    const int step_r = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    // Distances (in cells) along the ray to the next column / row boundary.
    double t_col = dx != 0.0 ? ((dx > 0 ? col + 1 - gx : gx - col) / std::abs(dx)) : inf;
    double t_row = dy != 0.0 ? ((dy > 0 ? row + 1 - gy : gy - row) / std::abs(dy)) : inf;
    const double dt_col = dx != 0.0 ? 1.0 / std::abs(dx) : inf;
    const double dt_row = dy != 0.0 ? 1.0 / std::abs(dy) : inf;
    const double t_max = params.max_range / res;
    double t_enter = 0.0;
    double range = params.max_range;
    bool hit = false;
    while (true) {
      if (world.is_obstacle(row, col)) {
        range = t_enter * res;
        hit = true;
        if (seen && world.occupancy().in_bounds(row, col)) (*seen)(row, col) = 1;
        break;
      }
      if (seen) (*seen)(row, col) = 1;
      const double t_next = std::min(t_col, t_row);
      if (t_next >= t_max) break;
      t_enter = t_next;
      if (t_col <= t_row) {
        col += step_c;
        t_col += dt_col;
      } else {
        row += step_r;
        t_row += dt_row;
      }
    }
    scan.ranges.push_back(range);
    scan.hits.push_back(hit ? 1 : 0);
  }
  return scan;
}

/// Scan from the agent's true pose; updates the world's seen mask.
inline RangeScan range_scan(GridWorld& world, const ScanParams& params = {}) {
  return cast_scan(world, world.agent(), params, &world.seen_mask());
}

// ---------------------------------------------------------------------------
// Coverage

inline double explorable_area(const GridWorld& world) {
  return static_cast<double>(world.free_cell_count()) * world.resolution() *
         world.resolution();
}

struct Coverage {
  double area_m2 = 0.0;
  double fraction = 0.0;
};

inline Coverage true_coverage(const GridWorld& world) {
  std::size_t n = 0;
  const auto occ = world.occupancy().values();
  const auto seen = world.seen_mask().values();
  for (std::size_t i = 0; i < occ.size(); ++i) n += (seen[i] && !occ[i]) ? 1 : 0;
  const double area = static_cast<double>(n) * world.resolution() * world.resolution();
  const double total = explorable_area(world);
  return {area, total > 0.0 ? area / total : 0.0};
}

// ---------------------------------------------------------------------------
// ASCII world files

inline std::string world_to_string(const GridWorld& world) {
  std::string out = "ANSW1 " + std::to_string(world.rows()) + " " +
                    std::to_string(world.cols()) + " " +
                    format_double(world.resolution()) + "\n";
  for (int r = 0; r < world.rows(); ++r) {
    for (int c = 0; c < world.cols(); ++c) out += world.occupancy()(r, c) ? '#' : '.';
    out += '\n';
  }
  if (world.start()) {
    const Pose& p = *world.start();
    const Cell c = world.cell_of(p);
    out += "A " + std::to_string(c.row) + " " + std::to_string(c.col) + " " +
           format_double(rad2deg(p.theta)) + "\n";
  }
  return out;
}

inline GridWorld parse_world(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("world: empty input");
  std::istringstream head(line);
  std::string magic;
  long long h = 0;
  long long w = 0;
  std::string res_text;
  if (!(head >> magic >> h >> w >> res_text) || magic != "ANSW1") {
    throw ParseError("world line 1: expected 'ANSW1 <H> <W> <resolution>'");
  }
  const auto res = parse_double(res_text);
  if (!res || h < 3 || w < 3 || h > 100000 || w > 100000) {
    throw ParseError("world line 1: bad dimensions or resolution");
  }
  Occupancy occ(static_cast<int>(h), static_cast<int>(w), 1);
  for (int r = 0; r < h; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError("world: expected " + std::to_string(h) + " rows, got " +
                       std::to_string(r));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<long long>(line.size()) != w) {
      throw ParseError("world line " + std::to_string(r + 2) + ": expected " +
                       std::to_string(w) + " columns, got " +
                       std::to_string(line.size()));
    }
    for (int c = 0; c < w; ++c) {
      const char ch = line[static_cast<std::size_t>(c)];
      if (ch != '#' && ch != '.') {
        throw ParseError("world line " + std::to_string(r + 2) +
                         ": unknown character '" + std::string(1, ch) + "'");
      }
      occ(r, c) = ch == '#' ? 1 : 0;
    }
  }
  GridWorld world(std::move(occ), *res);
  int line_no = static_cast<int>(h) + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream tr(line);
    std::string tag;
    int row = 0;
    int col = 0;
    std::string deg_text;
    std::string extra;
    if (!(tr >> tag >> row >> col >> deg_text) || tag != "A" || (tr >> extra)) {
      throw ParseError("world line " + std::to_string(line_no) +
                       ": expected 'A <row> <col> <o_deg>'");
    }
    const auto deg = parse_double(deg_text);
    if (!deg) throw ParseError("world line " + std::to_string(line_no) + ": bad angle");
    if (world.is_obstacle(row, col)) {
      throw ValidationError("world line " + std::to_string(line_no) +
                            ": start cell " + to_string(Cell{row, col}) +
                            " is not free");
    }
    world.set_start(world.cell_center({row, col}, wrap_angle(deg2rad(*deg))));
  }
  return world;
}

inline GridWorld load_world(const std::string& path) {
  return parse_world(read_file(path));
}

inline void save_world(const GridWorld& world, const std::string& path) {
  write_file_atomic(path, world_to_string(world));
}

// ---------------------------------------------------------------------------
// Procedural generation

enum class WorldStyle { Rooms, Maze, Cave };

inline std::string_view world_style_name(WorldStyle s) {
  switch (s) {
    case WorldStyle::Rooms: return "rooms";
    case WorldStyle::Maze: return "maze";
    case WorldStyle::Cave: return "cave";
  }
  return "rooms";
}

inline std::optional<WorldStyle> parse_world_style(std::string_view s) {
  for (auto st : {WorldStyle::Rooms, WorldStyle::Maze, WorldStyle::Cave}) {
    if (world_style_name(st) == s) return st;
  }
  return std::nullopt;
}

/// The layout is drawn inside a footprint sized so that the free area lands
/// in [min_area_m2, max_area_m2]; the rest of the grid stays solid.
struct WorldParams {
  int size_cells = 480;
  WorldStyle style = WorldStyle::Rooms;
  double min_free_fraction = 0.0;  // of the whole grid
  double min_area_m2 = 16.0;
  double max_area_m2 = 100.0;
};

inline constexpr int kMaxGenerationAttempts = 100;

namespace detail {

// Labels 4-connected free components; returns the label grid (-1 on
// obstacles) and the size of each component.
inline std::vector<int> label_components(const Occupancy& occ, Grid<int>& label) {
  label = Grid<int>(occ.rows(), occ.cols(), -1);
  std::vector<int> sizes;
  std::vector<Cell> stack;
  for (int r = 0; r < occ.rows(); ++r) {
    for (int c = 0; c < occ.cols(); ++c) {
      if (occ(r, c) || label(r, c) >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      int count = 0;
      stack.push_back({r, c});
      label(r, c) = id;
      while (!stack.empty()) {
        const Cell cur = stack.back();
        stack.pop_back();
        ++count;
        const Cell nb[4] = {{cur.row - 1, cur.col}, {cur.row + 1, cur.col},
                            {cur.row, cur.col - 1}, {cur.row, cur.col + 1}};
        for (const Cell& n : nb) {
          if (occ.in_bounds(n) && !occ[n] && label[n] < 0) {
            label[n] = id;
            stack.push_back(n);
          }
        }
      }
      sizes.push_back(count);
    }
  }
  return sizes;
}

inline void keep_largest_component(Occupancy& occ) {
  Grid<int> label;
  const auto sizes = label_components(occ, label);
  if (sizes.empty()) return;
  const int keep = static_cast<int>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int r = 0; r < occ.rows(); ++r) {
    for (int c = 0; c < occ.cols(); ++c) {
      if (!occ(r, c) && label(r, c) != keep) occ(r, c) = 1;
    }
  }
}

inline void fill_rect(Occupancy& occ, Rect r, std::uint8_t v) {
  r = intersect(r, occ.bounds());
  for (int i = r.row0; i < r.row_end(); ++i) {
    for (int j = r.col0; j < r.col_end(); ++j) occ(i, j) = v;
  }
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Door {
  bool vertical_wall;  // wall runs along rows (constant column band)
  int fixed0, fixed1;  // wall band [fixed0, fixed1)
  int from, to;        // door opening along the wall [from, to)
};

constexpr int kWallCells = 3;
constexpr int kDoorCells = 16;
constexpr int kMinRoomCells = 44;
constexpr int kMaxRoomCells = 90;

// Recursive partition of `room` (free interior) with doors in every wall.
inline void split_rooms(Occupancy& occ, Rect room, std::mt19937_64& rng,
                        std::vector<Door>& doors, std::vector<Rect>& leaves) {
  const bool can_v = room.cols >= 2 * kMinRoomCells + kWallCells;
  const bool can_h = room.rows >= 2 * kMinRoomCells + kWallCells;
  const bool must = room.cols > kMaxRoomCells || room.rows > kMaxRoomCells;
  if ((!can_v && !can_h) || (!must && uniform_real(rng, 0.0, 1.0) < 0.35)) {
    leaves.push_back(room);
    return;
  }
  bool vertical = can_v && (!can_h || room.cols > room.rows ||
                            (room.cols == room.rows && uniform_int(rng, 0, 1)));
  const int extent = vertical ? room.cols : room.rows;
  const int lo = kMinRoomCells;
  const int hi = extent - kMinRoomCells - kWallCells;
  // A new wall must not end inside an existing door opening.
  int at = -1;
  for (int tries = 0; tries < 20 && at < 0; ++tries) {
    const int cand = uniform_int(rng, lo, hi);
    const int band0 = (vertical ? room.col0 : room.row0) + cand;
    bool blocked = false;
    for (const Door& d : doors) {
      if (d.vertical_wall == vertical) continue;
      if (band0 + kWallCells > d.from - 2 && band0 < d.to + 2) {
        const int end_a = vertical ? room.row0 - 1 : room.col0 - 1;
        const int end_b = vertical ? room.row_end() : room.col_end();
        if ((end_a >= d.fixed0 - 1 && end_a < d.fixed1 + 1) ||
            (end_b >= d.fixed0 - 1 && end_b < d.fixed1 + 1)) {
          blocked = true;
        }
      }
    }
    if (!blocked) at = cand;
  }
  if (at < 0) {
    leaves.push_back(room);
    return;
  }
  Door door{};
  door.vertical_wall = vertical;
  if (vertical) {
    const int c0 = room.col0 + at;
    fill_rect(occ, {room.row0, c0, room.rows, kWallCells}, 1);
    const int from = room.row0 + uniform_int(rng, 2, room.rows - kDoorCells - 2);
    fill_rect(occ, {from, c0, kDoorCells, kWallCells}, 0);
    door = {true, c0, c0 + kWallCells, from, from + kDoorCells};
    doors.push_back(door);
    split_rooms(occ, {room.row0, room.col0, room.rows, at}, rng, doors, leaves);
    split_rooms(occ, {room.row0, c0 + kWallCells, room.rows,
                      room.col_end() - c0 - kWallCells},
                rng, doors, leaves);
  } else {
    const int r0 = room.row0 + at;
    fill_rect(occ, {r0, room.col0, kWallCells, room.cols}, 1);
    const int from = room.col0 + uniform_int(rng, 2, room.cols - kDoorCells - 2);
    fill_rect(occ, {r0, from, kWallCells, kDoorCells}, 0);
    door = {false, r0, r0 + kWallCells, from, from + kDoorCells};
    doors.push_back(door);
    split_rooms(occ, {room.row0, room.col0, at, room.cols}, rng, doors, leaves);
    split_rooms(occ, {r0 + kWallCells, room.col0,
                      room.row_end() - r0 - kWallCells, room.cols},
                rng, doors, leaves);
  }
}

inline void draw_rooms(Occupancy& occ, Rect fp, std::mt19937_64& rng) {
  fill_rect(occ, fp, 0);
  std::vector<Door> doors;
  std::vector<Rect> leaves;
  split_rooms(occ, fp, rng, doors, leaves);
  // Furniture keeps a 0.6 m aisle to every wall so rooms stay passable.
  const int aisle = 12;
  for (const Rect& room : leaves) {
    const Rect inner{room.row0 + aisle, room.col0 + aisle, room.rows - 2 * aisle,
                     room.cols - 2 * aisle};
    if (inner.rows < 8 || inner.cols < 8) continue;
    const int n = uniform_int(rng, 0, 2);
    for (int k = 0; k < n; ++k) {
      const int h = std::min(inner.rows, uniform_int(rng, 6, 16));
      const int w = std::min(inner.cols, uniform_int(rng, 6, 16));
      const int r = inner.row0 + uniform_int(rng, 0, inner.rows - h);
      const int c = inner.col0 + uniform_int(rng, 0, inner.cols - w);
      fill_rect(occ, {r, c, h, w}, 1);
    }
  }
}

inline void draw_maze(Occupancy& occ, Rect fp, std::mt19937_64& rng) {
  const int corridor = uniform_int(rng, 16, 20);
  const int pitch = corridor + kWallCells;
  const int nr = std::max(1, (fp.rows - kWallCells) / pitch);
  const int nc = std::max(1, (fp.cols - kWallCells) / pitch);
  auto cell_rect = [&](int i, int j) {
    return Rect{fp.row0 + kWallCells + i * pitch, fp.col0 + kWallCells + j * pitch,
                corridor, corridor};
  };
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nc; ++j) fill_rect(occ, cell_rect(i, j), 0);
  }
  auto open_between = [&](int i, int j, int i2, int j2) {
    const Rect a = cell_rect(i, j);
    const Rect b = cell_rect(i2, j2);
    fill_rect(occ, bounding_union(a, b), 0);
  };
  Grid<std::uint8_t> visited(nr, nc, 0);
  std::vector<Cell> stack{{uniform_int(rng, 0, nr - 1), uniform_int(rng, 0, nc - 1)}};
  visited[stack.back()] = 1;
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  while (!stack.empty()) {
    const Cell cur = stack.back();
    std::vector<Cell> options;
    for (int k = 0; k < 4; ++k) {
      const Cell n{cur.row + dr[k], cur.col + dc[k]};
      if (visited.in_bounds(n) && !visited[n]) options.push_back(n);
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    const Cell n = options[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(options.size()) - 1))];
    open_between(cur.row, cur.col, n.row, n.col);
    visited[n] = 1;
    stack.push_back(n);
  }
  // Braid: knock out some extra walls so the maze has loops.
  const int extra = (nr * nc) / 8;
  for (int k = 0; k < extra; ++k) {
    const int i = uniform_int(rng, 0, nr - 1);
    const int j = uniform_int(rng, 0, nc - 1);
    const int dir = uniform_int(rng, 0, 3);
    const Cell n{i + dr[dir], j + dc[dir]};
    if (visited.in_bounds(n)) open_between(i, j, n.row, n.col);
  }
}

inline void draw_cave(Occupancy& occ, Rect fp, std::mt19937_64& rng) {
  // Cellular automaton on 0.2 m blocks, then upsampled.
  constexpr int block = 4;
  const int br = fp.rows / block;
  const int bc = fp.cols / block;
  Grid<std::uint8_t> g(br, bc, 1);
  for (int r = 1; r + 1 < br; ++r) {
    for (int c = 1; c + 1 < bc; ++c) g(r, c) = uniform_real(rng, 0.0, 1.0) < 0.42 ? 1 : 0;
  }
  for (int it = 0; it < 5; ++it) {
    Grid<std::uint8_t> next = g;
    for (int r = 1; r + 1 < br; ++r) {
      for (int c = 1; c + 1 < bc; ++c) {
        int walls = 0;
        for (int i = -1; i <= 1; ++i) {
          for (int j = -1; j <= 1; ++j) walls += (i || j) ? g(r + i, c + j) : 0;
        }
        next(r, c) = walls >= 5 ? 1 : (walls <= 3 ? 0 : g(r, c));
      }
    }
    g = std::move(next);
  }
  for (int r = 0; r < br; ++r) {
    for (int c = 0; c < bc; ++c) {
      fill_rect(occ, {fp.row0 + r * block, fp.col0 + c * block, block, block}, g(r, c));
    }
  }
}

// Expected share of the footprint left free, used to size the footprint.
inline double style_free_share(WorldStyle s) {
  switch (s) {
    case WorldStyle::Rooms: return 0.9;
    case WorldStyle::Maze: return 0.72;
    case WorldStyle::Cave: return 0.5;
  }
  return 0.8;
}

}  // namespace detail

/// Deterministic per (seed, params). Keeps only the largest connected free
/// region and places the start on a cell with at least 0.15 m clearance.
inline GridWorld generate_world(std::uint64_t seed, const WorldParams& params) {
  if (params.size_cells < 40) {
    throw InvalidArgument("generate_world: size must be at least 40 cells");
  }
  if (!(params.min_area_m2 >= 0.0) || !(params.max_area_m2 >= params.min_area_m2)) {
    throw InvalidArgument("generate_world: bad area range");
  }
  const int n = params.size_cells;
  const double cell_area = kCellArea;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(attempt),
                      static_cast<std::uint32_t>(params.style)};
    std::mt19937_64 rng(seq);
    const double hi_area = std::min(params.max_area_m2,
                                    (n - 2) * (n - 2) * cell_area);
    const double target = detail::uniform_real(
        rng, std::min(params.min_area_m2, hi_area), hi_area);
    const double aspect = detail::uniform_real(rng, 0.7, 1.4);
    const double fp_cells = target / cell_area / detail::style_free_share(params.style);
    int fr = static_cast<int>(std::lround(std::sqrt(fp_cells * aspect)));
    int fc = static_cast<int>(std::lround(std::sqrt(fp_cells / aspect)));
    fr = std::clamp(fr, 8, n - 2);
    fc = std::clamp(fc, 8, n - 2);
    const Rect fp{detail::uniform_int(rng, 1, n - 1 - fr),
                  detail::uniform_int(rng, 1, n - 1 - fc), fr, fc};

    Occupancy occ(n, n, 1);
    switch (params.style) {
      case WorldStyle::Rooms: detail::draw_rooms(occ, fp, rng); break;
      case WorldStyle::Maze: detail::draw_maze(occ, fp, rng); break;
      case WorldStyle::Cave: detail::draw_cave(occ, fp, rng); break;
    }
    detail::fill_rect(occ, {0, 0, 1, n}, 1);
    detail::fill_rect(occ, {n - 1, 0, 1, n}, 1);
    detail::fill_rect(occ, {0, 0, n, 1}, 1);
    detail::fill_rect(occ, {0, n - 1, n, 1}, 1);
    detail::keep_largest_component(occ);

    GridWorld world(std::move(occ));
    const double area = explorable_area(world);
    const double frac = static_cast<double>(world.free_cell_count()) / (double(n) * n);
    if (area < params.min_area_m2 || area > params.max_area_m2 ||
        frac < params.min_free_fraction) {
      continue;
    }
    std::vector<Cell> starts;
    for (int r = 1; r + 1 < n; ++r) {
      for (int c = 1; c + 1 < n; ++c) {
        if (world.occupancy()(r, c)) continue;
        const Pose p = world.cell_center({r, c});
        if (world.clearance(p.x, p.y, kStartClearance) >= kStartClearance) {
          starts.push_back({r, c});
        }
      }
    }
    if (starts.empty()) continue;
    const Cell s = starts[static_cast<std::size_t>(
        detail::uniform_int(rng, 0, static_cast<int>(starts.size()) - 1))];
    const double theta = wrap_angle(detail::uniform_real(rng, -kPi, kPi));
    world.set_start(world.cell_center(s, theta));
    return world;
  }
  throw GenerationFailure("generate_world: no world satisfied the parameters after " +
                          std::to_string(kMaxGenerationAttempts) + " attempts");
}

}  // namespace ans
