#pragma once

// The fixed acceptance suite shared by the acceptance test binary and the
// `bench` command. Each criterion returns a verdict, a one-line detail and
// its wall time.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ans/episode.hpp"
#include "ans/geometry.hpp"
#include "ans/mapping.hpp"
#include "ans/noise.hpp"
#include "ans/parallel.hpp"
#include "ans/planner.hpp"
#include "ans/policies.hpp"
#include "ans/pose_estimator.hpp"
#include "ans/verify/oracles.hpp"
#include "ans/world.hpp"

namespace ans::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

struct Options {
  int workers = 0;  // 0: one per core (ANS_WORKERS still wins)
};

inline std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------
// World and episode fixtures

// Name and wall-time budget (0: none) per criterion.
inline CriterionResult blank(int id) {
  static const std::pair<const char*, double> heads[] = {
      {"FMM bounds", 30.0},          {"GMM pipeline", 60.0},
      {"pose-correction ablation", 300.0}, {"frontier exploration", 120.0},
      {"PointGoal transfer", 180.0}, {"episode-set filters", 0.0},
      {"determinism", 0.0},          {"invariant suites", 0.0}};
  const auto& h = heads[id - 1];
  return {id, h.first, false, "", 0.0, h.second};
}

inline WorldParams small_rooms() {
  WorldParams p;
  p.style = WorldStyle::Rooms;
  p.min_area_m2 = 16.0;
  p.max_area_m2 = 36.0;
  return p;
}

inline WorldParams large_mazes() {
  WorldParams p;
  p.style = WorldStyle::Maze;
  p.min_area_m2 = 60.0;
  p.max_area_m2 = 100.0;
  return p;
}

inline GridWorld world_for(const EpisodeSpec& spec, const WorldParams& wp) {
  GridWorld w = generate_world(spec.world_seed, wp);
  w.set_start(spec.start);
  return w;
}

inline EpisodeConfig pointgoal_config(const EpisodeSpec& spec, std::uint64_t seed, bool noise) {
  EpisodeConfig cfg;
  cfg.task = Task::PointGoal;
  cfg.global = GlobalKind::FixedGoal;
  cfg.goal = spec.goal;
  cfg.noise = noise;
  // Without noise the sensor pose is the true pose; correction is only
  // exercised on the noisy run.
  cfg.pose_correction = noise;
  cfg.seed = seed;
  return cfg;
}

/// Random rectangles in a walled `n` x `n` grid, largest component kept.
inline Occupancy random_block_world(std::uint64_t seed, int n = 100) {
  std::mt19937_64 rng(seed);
  Occupancy occ(n, n, 0);
  for (int i = 0; i < n; ++i) {
    occ(0, i) = occ(n - 1, i) = occ(i, 0) = occ(i, n - 1) = 1;
  }
  std::uniform_int_distribution<int> pos(1, n - 2);
  std::uniform_int_distribution<int> len(2, n / 6);
  for (int k = 0; k < 14; ++k) {
    const int r = pos(rng), c = pos(rng), h = len(rng), w = len(rng);
    for (int i = r; i < std::min(n - 1, r + h); ++i) {
      for (int j = c; j < std::min(n - 1, c + w); ++j) occ(i, j) = 1;
    }
  }
  detail::keep_largest_component(occ);
  return occ;
}

// ---------------------------------------------------------------------------
// 1. FMM against Euclidean and 8-connected Dijkstra bounds

inline CriterionResult fmm_correctness(const Options&) {
  CriterionResult out = blank(1);
  const double h = kCellSize;
  std::size_t pairs = 0, below_euclid = 0, above_dijkstra = 0;
  double worst_free = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Occupancy occ = random_block_world(seed);
    const Mask free = free_mask(occ);
    std::vector<Cell> cells;
    for (int r = 0; r < free.rows(); ++r) {
      for (int c = 0; c < free.cols(); ++c) {
        if (free(r, c)) cells.push_back({r, c});
      }
    }
    std::mt19937_64 rng(seed + 7);
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    for (int s = 0; s < 4; ++s) {
      const Cell src = cells[pick(rng)];
      const DistanceField f = fmm(free, src, h);
      const Grid<double> d8 = verify::dijkstra8(free, src, h);
      for (int q = 0; q < 50; ++q) {
        const Cell dst = cells[pick(rng)];
        const double t = f.at(dst);
        if (!(t < kInf)) continue;
        ++pairs;
        const double eu = std::hypot(dst.row - src.row, dst.col - src.col) * h;
        if (t < eu - 1e-9) ++below_euclid;
        if (t > d8[dst] + 1e-9) ++above_dijkstra;
      }
    }
    // Obstacle-free grid of the same size.
    const Mask open(free.rows(), free.cols(), 1);
    const Cell src = cells[pick(rng)];
    const DistanceField f = fmm(open, src, h);
    for (int r = 0; r < open.rows(); ++r) {
      for (int c = 0; c < open.cols(); ++c) {
        const double eu = std::hypot(r - src.row, c - src.col) * h;
        if (eu == 0.0) continue;
        worst_free = std::max(worst_free, std::abs(f.at({r, c}) - eu) / eu);
      }
    }
  }
  out.passed = pairs > 0 && below_euclid == 0 && above_dijkstra == 0 && worst_free <= 0.02;
  out.detail = std::to_string(pairs) + " pairs, " + std::to_string(below_euclid) +
               " below Euclidean, " + std::to_string(above_dijkstra) +
               " above Dijkstra; open-grid max rel err " + fmt("%.4f", worst_free);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Noise-model fitting closed loop and k recovery

inline CriterionResult gmm_pipeline(const Options& o) {
  CriterionResult out = blank(2);
  const NoiseModelSet truth = default_noise_models();
  std::mt19937_64 rng(2024);
  const CalibrationDataset data = synthesize_calibration(truth, default_commands(), 600, rng);
  NoiseFitOptions opt;
  opt.seed = 11;
  const NoiseModelSet fitted = build_noise_models(data, default_commands(), opt);
  double worst = 0.0;
  for (Action a : kMotionActions) {
    for (NoiseKind k : {NoiseKind::Actuation, NoiseKind::Sensor}) {
      std::vector<Vec3> xs;
      for (int i = 0; i < 4000; ++i) {
        const PoseDelta d = truth.get(a, k).sample(rng);
        xs.push_back({d.dx, d.dy, d.dtheta});
      }
      const double gap = std::abs(truth.get(a, k).mean_log_likelihood(xs) -
                                  fitted.get(a, k).mean_log_likelihood(xs));
      worst = std::max(worst, gap);
    }
  }

  // Well-separated two-component mixtures with per-seed parameters.
  const auto hits = parallel_map(20, worker_count(o.workers), [](std::size_t seed) {
    std::mt19937_64 g(1000 + seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> s(0.5, 1.5);
    const Vec3 m0(u(g), u(g), u(g));
    Vec3 dir(u(g), u(g), u(g));
    dir.normalize();
    const Vec3 m1 = m0 + 12.0 * dir;
    const GaussianMixture3D gen({detail::diag_component(0.5, m0, {s(g), s(g), s(g)}),
                                 detail::diag_component(0.5, m1, {s(g), s(g), s(g)})});
    std::vector<Vec3> xs;
    for (int i = 0; i < 500; ++i) xs.push_back(gen.sample_vector(g));
    const auto ks = k_range(1, 5);
    return fit_gmm(xs, ks, 1.0 / 6.0, seed).k == 2 ? 1 : 0;
  });
  int recovered = 0;
  for (int h : hits) recovered += h;
  out.passed = worst <= 0.15 && recovered >= 18;
  out.detail = "max held-out gap " + fmt("%.4f", worst) + " nats; k=2 recovered in " +
               std::to_string(recovered) + "/20";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Pose-correction ablation on noisy large mazes

struct PairedStat {
  double mean = 0.0;
  double se = 0.0;
};

inline PairedStat paired(const std::vector<double>& diffs) {
  PairedStat s;
  const double n = static_cast<double>(diffs.size());
  for (double d : diffs) s.mean += d / n;
  double v = 0.0;
  for (double d : diffs) v += (d - s.mean) * (d - s.mean);
  s.se = n > 1 ? std::sqrt(v / (n - 1) / n) : 0.0;
  return s;
}

inline CriterionResult pose_correction_ablation(const Options& o) {
  CriterionResult out = blank(3);
  constexpr int kSeeds = 20;
  const WorldParams wp = large_mazes();
  const auto runs = parallel_map(2 * kSeeds, worker_count(o.workers), [&](std::size_t i) {
    const std::uint64_t seed = i / 2;
    EpisodeConfig cfg;
    cfg.noise = true;
    cfg.pose_correction = (i % 2) == 1;
    cfg.seed = seed;
    const EpisodeMetrics m = run_episode(cfg, generate_world(1000 + seed, wp));
    return std::pair{m.pct_cov, m.final_pose_error_m};
  });
  std::vector<double> cov_gain, err_gain;
  double cov_on = 0.0, cov_off = 0.0, err_on = 0.0, err_off = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto& off = runs[2 * s];
    const auto& on = runs[2 * s + 1];
    cov_gain.push_back(on.first - off.first);
    err_gain.push_back(off.second - on.second);
    cov_on += on.first / kSeeds;
    cov_off += off.first / kSeeds;
    err_on += on.second / kSeeds;
    err_off += off.second / kSeeds;
  }
  const PairedStat c = paired(cov_gain);
  const PairedStat e = paired(err_gain);
  out.passed = c.mean > 0.0 && e.mean > 0.0 && c.mean > c.se && e.mean > e.se;
  out.detail = "%Cov on " + fmt("%.3f", cov_on) + " off " + fmt("%.3f", cov_off) + " (gap " +
               fmt("%.3f", c.mean) + ", se " + fmt("%.3f", c.se) + "); error on " +
               fmt("%.3f", err_on) + " m off " + fmt("%.3f", err_off) + " m (gap " +
               fmt("%.3f", e.mean) + ", se " + fmt("%.3f", e.se) + ")";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Frontier exploration on small worlds, noise off

inline CriterionResult frontier_exploration(const Options& o) {
  CriterionResult out = blank(4);
  const WorldParams wp = small_rooms();
  const auto runs = parallel_map(10, worker_count(o.workers), [&](std::size_t i) {
    EpisodeConfig cfg;
    cfg.noise = false;
    cfg.seed = i;
    return run_episode(cfg, generate_world(i, wp));
  });
  double mean = 0.0;
  int monotone = 0;
  for (const auto& m : runs) {
    mean += m.pct_cov / static_cast<double>(runs.size());
    monotone += std::is_sorted(m.cov_curve.begin(), m.cov_curve.end()) ? 1 : 0;
  }
  out.passed = mean >= 0.95 && monotone == static_cast<int>(runs.size());
  out.detail = "mean %Cov " + fmt("%.4f", mean) + ", monotone curves " + std::to_string(monotone) +
               "/" + std::to_string(runs.size());
  return out;
}

// ---------------------------------------------------------------------------
// 5. PointGoal with a fixed long-term goal

inline std::vector<EpisodeSpec> pointgoal_set() {
  EpisodeSetParams p;
  p.world = small_rooms();
  p.filters.min_geodesic_m = 1.0;
  return generate_episode_set(100, 5, p);
}

inline CriterionResult pointgoal_transfer(const Options& o) {
  CriterionResult out = blank(5);
  const auto specs = pointgoal_set();
  const WorldParams wp = small_rooms();
  const auto runs = parallel_map(2 * specs.size(), worker_count(o.workers), [&](std::size_t i) {
    const EpisodeSpec& s = specs[i / 2];
    return run_episode(pointgoal_config(s, i / 2, (i % 2) == 1), world_for(s, wp));
  });
  // Success counts stay integral so "all episodes" is an exact comparison.
  std::size_t ok_clean = 0, ok_noisy = 0;
  double spl_clean = 0.0;
  const double n = static_cast<double>(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ok_clean += runs[2 * i].success ? 1 : 0;
    spl_clean += runs[2 * i].spl / n;
    ok_noisy += runs[2 * i + 1].success ? 1 : 0;
  }
  const double succ_clean = static_cast<double>(ok_clean) / n;
  const double succ_noisy = static_cast<double>(ok_noisy) / n;
  out.passed = ok_clean == specs.size() && spl_clean >= 0.80 && succ_noisy >= 0.85;
  out.detail = "noise off: success " + fmt("%.2f", succ_clean) + ", SPL " +
               fmt("%.3f", spl_clean) + "; noisy with correction: success " +
               fmt("%.2f", succ_noisy);
  return out;
}

// ---------------------------------------------------------------------------
// 6. Episode-set filters, re-checked on every emitted episode

inline CriterionResult episode_filters(const Options&) {
  CriterionResult out = blank(6);
  auto check = [](const std::vector<EpisodeSpec>& specs, const WorldParams& wp,
                  const EpisodeFilters& f, int& bad) {
    for (const auto& s : specs) {
      const GridWorld w = generate_world(s.world_seed, wp);
      const Cell a = w.cell_of(s.start);
      const double l = geodesic_distance(free_mask(w.occupancy()), a, s.goal);
      const double eu = std::hypot(s.goal.row - a.row, s.goal.col - a.col) * kCellSize;
      const bool ok = std::abs(l - s.geodesic_m) <= 1e-9 && l >= f.min_geodesic_m &&
                      l / eu >= f.min_ged_ratio && s.ged_ratio >= f.min_ged_ratio &&
                      l / eu >= 1.0;
      if (!ok) ++bad;
    }
  };
  int bad = 0;
  EpisodeSetParams gedr;
  gedr.world = small_rooms();
  gedr.filters.min_ged_ratio = 2.0;
  const auto a = generate_episode_set(20, 1, gedr);
  check(a, gedr.world, gedr.filters, bad);

  EpisodeSetParams dist;
  dist.world = small_rooms();
  dist.world.min_area_m2 = 60.0;
  dist.world.max_area_m2 = 100.0;
  dist.filters.min_geodesic_m = 8.0;
  const auto b = generate_episode_set(20, 2, dist);
  check(b, dist.world, dist.filters, bad);

  EpisodeSetParams plain;
  plain.world = small_rooms();
  const auto c = generate_episode_set(20, 3, plain);
  check(c, plain.world, plain.filters, bad);

  out.passed = bad == 0;
  out.detail = std::to_string(a.size() + b.size() + c.size()) +
               " episodes (GED ratio >= 2.0, geodesic >= 8 m, unfiltered), " +
               std::to_string(bad) + " violations";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Determinism of bench sub-runs

/// A small mixed batch: noisy exploration and noisy PointGoal episodes.
inline std::string bench_subrun(std::uint64_t seed, int workers) {
  const WorldParams wp = small_rooms();
  EpisodeSetParams sp;
  sp.world = wp;
  sp.filters.min_geodesic_m = 1.0;
  const auto specs = generate_episode_set(2, seed, sp);
  const auto runs = parallel_map(4, workers, [&](std::size_t i) {
    if (i < 2) {
      EpisodeConfig cfg;
      cfg.seed = seed + i;
      cfg.max_steps = 150;
      return run_episode(cfg, generate_world(seed + i, wp));
    }
    const EpisodeSpec& s = specs[i - 2];
    return run_episode(pointgoal_config(s, seed + i, true), world_for(s, wp));
  });
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 4; ++i) seeds.push_back(seed + i);
  return metrics_csv(runs, seeds);
}

inline CriterionResult determinism(const Options& o) {
  CriterionResult out = blank(7);
  int same = 0;
  const int w = worker_count(o.workers);
  for (std::uint64_t seed : {3ULL, 8ULL}) {
    const std::string a = bench_subrun(seed, w);
    const std::string b = bench_subrun(seed, 1);
    same += a == b ? 1 : 0;
  }
  out.passed = same == 2;
  out.detail = std::to_string(same) + "/2 sub-runs byte-identical on repeat";
  return out;
}

// ---------------------------------------------------------------------------
// 8. Invariant suites

inline EgoMap random_ego(std::mt19937_64& rng, double density) {
  EgoMap e = make_ego();
  std::bernoulli_distribution on(density);
  for (int r = 0; r < e.rows(); ++r) {
    for (int c = 0; c < e.cols(); ++c) {
      if (!on(rng)) continue;
      e.at(kExploredChannel, r, c) = 1.0F;
      if (on(rng)) e.at(kObstacleChannel, r, c) = 1.0F;
    }
  }
  return e;
}

inline CriterionResult invariants(const Options&) {
  CriterionResult out = blank(8);
  std::vector<std::string> failed;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Aggregation: monotone and idempotent.
  {
    bool ok = true;
    SpatialMap m(240);
    for (int i = 0; i < 20 && ok; ++i) {
      const EgoMap e = random_ego(rng, 0.3);
      const Pose p{6.0 + u(rng), 6.0 + u(rng), kPi * u(rng)};
      const SpatialMap once = aggregate(m, e, p);
      const SpatialMap twice = aggregate(once, e, p);
      const auto a = m.grid().values();
      const auto b = once.grid().values();
      for (std::size_t k = 0; k < a.size(); ++k) ok = ok && b[k] >= a[k];
      ok = ok && twice == once;
      m = once;
    }
    if (!ok) failed.push_back("aggregation");
  }

  // Spatial transform: zero delta is the identity; two half turns return
  // the interior within 1e-6.
  {
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const EgoMap e = random_ego(rng, 0.4);
      ok = ok && spatial_transform(e, {kCellSize, {0.0, 0.0, 0.0}}) == e;
      const GridTransform half{kCellSize, {0.0, 0.0, kPi}};
      const EgoMap back = spatial_transform(spatial_transform(e, half), half);
      for (int ch = 0; ch < 2; ++ch) {
        for (int r = 2; r < e.rows() - 2; ++r) {
          for (int c = 2; c < e.cols() - 2; ++c) {
            ok = ok && std::abs(back.at(ch, r, c) - e.at(ch, r, c)) <= 1e-6;
          }
        }
      }
    }
    if (!ok) failed.push_back("spatial transform");
  }

  // Pose estimator: never below the sensed score, inside the search box.
  {
    bool ok = true;
    WorldParams wp = small_rooms();
    wp.size_cells = 240;
    GridWorld w = generate_world(4, wp);
    w.reset();
    w.seed_noise(4);
    const NoiseModelSet nm = default_noise_models();
    const PoseSearch ps;
    EgoMap prev = project_ego(range_scan(w));
    for (int t = 0; t < 40; ++t) {
      const Action a = t % 4 == 0 ? Action::TurnLeft : Action::Forward;
      const PoseDelta d = step(w, a, nm, true);
      const PoseDelta sensed = odometry(w, d, nm, true, a);
      const EgoMap cur = project_ego(range_scan(w));
      const PoseDelta got = estimate_delta(prev, cur, sensed, ps);
      const double s0 = verify::alignment_score_direct(prev, cur, sensed, ps.explored_weight,
                                                       ps.mismatch_weight);
      const double s1 = verify::alignment_score_direct(prev, cur, got, ps.explored_weight,
                                                       ps.mismatch_weight);
      ok = ok && s1 >= s0 - 1e-4 * std::max(1.0, std::abs(s0));
      ok = ok && std::abs(got.dx - sensed.dx) <= ps.r_xy + 1e-12 &&
           std::abs(got.dy - sensed.dy) <= ps.r_xy + 1e-12 &&
           std::abs(wrap_angle(got.dtheta - sensed.dtheta)) <= ps.r_o + 1e-12;
      prev = cur;
    }
    if (!ok) failed.push_back("estimate_delta");
  }

  // Frontier minimality and path monotonicity on a partly explored map.
  {
    bool frontier_ok = true;
    bool path_ok = true;
    WorldParams wp = small_rooms();
    GridWorld w = generate_world(6, wp);
    EpisodeConfig cfg;
    cfg.noise = false;
    cfg.max_steps = 1;
    w.set_start(choose_start(w, 6));
    w.reset();
    SpatialMap map(960);
    const Pose origin = map.origin();
    Rect known{};
    for (int k = 0; k < 36; ++k) {
      known = bounding_union(known, aggregate_into(map, project_ego(range_scan(w)),
                                                   compose(origin, between(*w.start(), w.agent()))));
      step(w, Action::TurnLeft, zero_noise_models(), false);
    }
    const Pose est = compose(origin, between(*w.start(), w.agent()));
    const Cell agent = map.cell_of(est);
    const FrontierParams fp;
    const FrontierResult fr = frontier_goal(map, est, known, fp);
    const Rect win = planning_window(map, known, agent, agent, fp.planner.window_margin);
    const DistanceField f = fmm(agent_traversable_mask(map, win, agent, fp.planner), agent, win,
                                map.resolution());
    if (!fr.saturated) {
      for (int r = win.row0; r < win.row_end(); ++r) {
        for (int c = win.col0; c < win.col_end(); ++c) {
          const Cell q{r, c};
          const double t = f.at(q);
          if (!(t < kInf) || t < fp.min_goal_distance - 1e-9) continue;
          if (is_explored_free(map, q) && is_frontier(map, q) && t < fr.distance - 1e-12) {
            frontier_ok = false;
          }
        }
      }
      frontier_ok = frontier_ok && std::abs(f.at(fr.goal) - fr.distance) <= 1e-12;
    }
    // Paths from a spread of start cells towards the chosen goal.
    const DistanceField g = plan_field(map, fr.goal, std::nullopt, known);
    int paths = 0;
    for (int r = win.row0; r < win.row_end(); r += 7) {
      for (int c = win.col0; c < win.col_end(); c += 7) {
        if (!(g.at({r, c}) < kInf)) continue;
        const PlanResult pr = extract_path(g, {r, c});
        ++paths;
        for (std::size_t k = 1; k < pr.path.size(); ++k) {
          path_ok = path_ok && g.at(pr.path[k]) < g.at(pr.path[k - 1]);
        }
        path_ok = path_ok && pr.path.back() == fr.goal;
      }
    }
    if (!frontier_ok) failed.push_back("frontier minimality");
    if (!path_ok || paths == 0) failed.push_back("path monotonicity");
  }

  out.passed = failed.empty();
  if (failed.empty()) {
    out.detail = "aggregation, spatial transform, estimate_delta, frontier, path: all hold";
  } else {
    out.detail = "failed:";
    for (const auto& s : failed) out.detail += " " + s + ";";
  }
  return out;
}

// ---------------------------------------------------------------------------

using CriterionFn = std::function<CriterionResult(const Options&)>;

inline std::vector<CriterionFn> criteria() {
  return {fmm_correctness, gmm_pipeline,         pose_correction_ablation, frontier_exploration,
          pointgoal_transfer, episode_filters, determinism,              invariants};
}

/// Runs criterion `id` (1-based) and times it; exceptions count as failure.
inline CriterionResult run_criterion(int id, const Options& o = {}) {
  const auto all = criteria();
  if (id < 1 || id > static_cast<int>(all.size())) {
    throw InvalidArgument("no acceptance criterion " + std::to_string(id));
  }
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = all[static_cast<std::size_t>(id - 1)](o);
  } catch (const std::exception& e) {
    r = blank(id);
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
    r.passed = false;
    r.detail += " (over the " + fmt("%.0f", r.budget_seconds) + " s budget)";
  }
  return r;
}

inline std::string result_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "criterion %d %-26s %s  %7.1fs  ", r.id, r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.seconds);
  return head + r.detail;
}

}  // namespace ans::acceptance
