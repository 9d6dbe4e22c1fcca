// ans: world generation, noise fitting, episode runs, benchmark and renders.
//
// Exit codes: 0 success, 2 usage or validation error, 3 runtime failure
// (episode generation, unreachable goal, failing benchmark).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ans/acceptance.hpp"
#include "ans/ans.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run settings. Keys are shared by the JSON config file and the flags
// (underscores become dashes); flags override the file.

json explore_defaults() {
  return {{"seed", 0},           {"seeds", ""},          {"episodes", 5},
          {"world", ""},         {"style", "rooms"},     {"size", 480},
          {"min_area", 16.0},    {"max_area", 36.0},     {"noise", true},
          {"pose_correction", true}, {"global", "frontier"}, {"max_steps", 0},
          {"noise_models", ""},  {"out", ""},            {"render", false},
          {"log_steps", false},  {"workers", 0}};
}

json pointgoal_defaults() {
  json d = explore_defaults();
  d.erase("global");
  d["goal"] = nullptr;
  d["min_geodesic"] = 1.0;
  d["min_ged_ratio"] = 0.0;
  return d;
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw UsageError(flag_name(key) + ": expected on/off, got '" + v + "'");
}

json parse_goal(const std::string& v) {
  const auto parts = ans::split_csv_line(v);
  if (parts.size() == 2) {
    const auto r = ans::parse_int(parts[0]);
    const auto c = ans::parse_int(parts[1]);
    if (r && c) return json::array({*r, *c});
  }
  throw UsageError("--goal: expected ROW,COL, got '" + v + "'");
}

// Converts a flag string to the JSON type of the key's default.
json flag_value(const std::string& key, const json& def, const std::string& v) {
  if (key == "goal") return parse_goal(v);
  if (def.is_boolean()) return parse_bool(key, v.empty() ? "on" : v);
  if (def.is_number_integer()) {
    if (const auto i = ans::parse_int(v)) return *i;
    throw UsageError(flag_name(key) + ": expected an integer, got '" + v + "'");
  }
  if (def.is_number()) {
    if (const auto d = ans::parse_double(v)) return *d;
    throw UsageError(flag_name(key) + ": expected a number, got '" + v + "'");
  }
  return v;
}

void check_type(const std::string& key, const json& def, const json& v) {
  bool ok = false;
  if (key == "goal") {
    ok = v.is_null() || (v.is_array() && v.size() == 2 && v[0].is_number_integer() &&
                         v[1].is_number_integer());
  } else if (def.is_boolean()) {
    ok = v.is_boolean();
  } else if (def.is_number_integer()) {
    ok = v.is_number_integer();
  } else if (def.is_number()) {
    ok = v.is_number();
  } else {
    ok = v.is_string();
  }
  if (!ok) throw UsageError("config key '" + key + "' has the wrong type");
}

std::string describe(const std::string& key) {
  static const std::map<std::string, std::string> help{
      {"seed", "first episode seed"},
      {"seeds", "explicit seed list, e.g. 0-4,9"},
      {"episodes", "episode count when --seeds is empty"},
      {"world", "world file or directory of .answ files (default: generate)"},
      {"style", "rooms, maze or cave"},
      {"size", "generated grid side in cells"},
      {"min_area", "generated explorable area lower bound, m2"},
      {"max_area", "generated explorable area upper bound, m2"},
      {"noise", "on/off: sensor and actuation noise"},
      {"pose_correction", "on/off: map-based pose correction"},
      {"global", "frontier or random"},
      {"max_steps", "0 means 1000 for explore, 500 for pointgoal"},
      {"noise_models", "noise model JSON from fit-noise (default: built-in)"},
      {"out", "output directory for CSVs, logs and renders"},
      {"render", "on/off: one PNG per episode"},
      {"log_steps", "on/off: one JSONL step log per episode"},
      {"workers", "worker threads, 0 means hardware concurrency"},
      {"goal", "ROW,COL goal cell in the world file"},
      {"min_geodesic", "generated episodes: minimum geodesic distance, m"},
      {"min_ged_ratio", "generated episodes: minimum geodesic/Euclidean ratio"}};
  const auto it = help.find(key);
  return it == help.end() ? std::string() : it->second;
}

// One string slot per key, registered as a flag on the subcommand.
struct SettingFlags {
  json defaults;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
  std::string config_path;
  bool print_config = false;

  void attach(CLI::App* app) {
    for (const auto& [key, def] : defaults.items()) {
      auto* o = app->add_option(flag_name(key), raw[key], describe(key));
      if (def.is_boolean()) o->expected(0, 1);
      opts[key] = o;
    }
    app->add_option("--config", config_path, "JSON file with the same keys as the flags");
    app->add_flag("--print-config", print_config, "print the merged settings and exit");
  }

  json merged() const {
    json s = defaults;
    if (!config_path.empty()) {
      json file;
      try {
        file = json::parse(ans::read_file(config_path));
      } catch (const json::exception& e) {
        throw UsageError("config '" + config_path + "': " + e.what());
      }
      if (!file.is_object()) throw UsageError("config '" + config_path + "' must be an object");
      for (const auto& [key, v] : file.items()) {
        if (!defaults.contains(key)) throw UsageError("config: unknown key '" + key + "'");
        check_type(key, defaults[key], v);
        s[key] = v;
      }
    }
    for (const auto& [key, o] : opts) {
      if (o->count() > 0) s[key] = flag_value(key, defaults[key], raw.at(key));
    }
    return s;
  }
};

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto a = ans::parse_int(text.substr(0, dots));
    const auto b = ans::parse_int(text.substr(dots + 2));
    if (!a || !b || *a < 0 || *b < *a) throw UsageError("--seeds: bad range '" + text + "'");
    for (long long s = *a; s <= *b; ++s) out.push_back(static_cast<std::uint64_t>(s));
    return out;
  }
  for (const auto& part : ans::split_csv_line(text)) {
    const auto v = ans::parse_int(part);
    if (!v || *v < 0) throw UsageError("--seeds: bad seed '" + part + "'");
    out.push_back(static_cast<std::uint64_t>(*v));
  }
  return out;
}

struct RunConfig {
  ans::Task task = ans::Task::Exploration;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> world_files;  // empty: generated worlds
  bool single_world_file = false;
  ans::WorldParams world;
  ans::EpisodeConfig episode;
  std::optional<ans::Cell> goal;
  ans::EpisodeFilters filters;
  std::string out;
  bool render = false;
  int workers = 0;
};

RunConfig validate(const json& s, ans::Task task) {
  RunConfig rc;
  rc.task = task;
  const auto seed = s["seed"].get<long long>();
  const auto episodes = s["episodes"].get<long long>();
  if (seed < 0) throw UsageError("--seed must be >= 0");
  if (episodes < 1) throw UsageError("--episodes must be >= 1");
  const std::string seeds = s["seeds"];
  if (seeds.empty()) {
    for (long long i = 0; i < episodes; ++i) rc.seeds.push_back(static_cast<std::uint64_t>(seed + i));
  } else {
    rc.seeds = parse_seed_list(seeds);
  }

  const std::string world = s["world"];
  if (!world.empty()) {
    if (fs::is_directory(world)) {
      for (const auto& e : fs::directory_iterator(world)) {
        if (e.path().extension() == ".answ") rc.world_files.push_back(e.path().string());
      }
      std::sort(rc.world_files.begin(), rc.world_files.end());
      if (rc.world_files.empty()) throw UsageError("--world: no .answ files in '" + world + "'");
    } else if (fs::is_regular_file(world)) {
      rc.world_files.push_back(world);
      rc.single_world_file = true;
    } else {
      throw UsageError("--world: '" + world + "' does not exist");
    }
  }
  const auto style = ans::parse_world_style(s["style"].get<std::string>());
  if (!style) throw UsageError("--style must be rooms, maze or cave");
  rc.world.style = *style;
  rc.world.size_cells = s["size"].get<int>();
  rc.world.min_area_m2 = s["min_area"];
  rc.world.max_area_m2 = s["max_area"];
  if (rc.world.size_cells < 40) throw UsageError("--size must be at least 40 cells");
  if (!(rc.world.min_area_m2 > 0.0 && rc.world.min_area_m2 <= rc.world.max_area_m2)) {
    throw UsageError("--min-area and --max-area must satisfy 0 < min <= max");
  }

  ans::EpisodeConfig& ec = rc.episode;
  ec.task = task;
  ec.noise = s["noise"];
  ec.pose_correction = s["pose_correction"];
  ec.max_steps = s["max_steps"].get<int>();
  if (ec.max_steps < 0) throw UsageError("--max-steps must be >= 0");
  ec.log_steps = s["log_steps"];
  if (task == ans::Task::Exploration) {
    const auto g = ans::parse_global_kind(s["global"].get<std::string>());
    if (!g || *g == ans::GlobalKind::FixedGoal) throw UsageError("--global must be frontier or random");
    ec.global = *g;
  } else {
    ec.global = ans::GlobalKind::FixedGoal;
    if (!s["goal"].is_null()) rc.goal = ans::Cell{s["goal"][0].get<int>(), s["goal"][1].get<int>()};
    rc.filters.min_geodesic_m = s["min_geodesic"];
    rc.filters.min_ged_ratio = s["min_ged_ratio"];
    if (rc.goal && !rc.single_world_file) throw UsageError("--goal needs --world pointing at one world file");
  }
  const std::string models = s["noise_models"];
  if (!models.empty()) ec.noise_models = ans::load_models(models);

  rc.out = s["out"];
  rc.render = s["render"];
  rc.workers = s["workers"].get<int>();
  if (rc.workers < 0) throw UsageError("--workers must be >= 0");
  if ((rc.render || ec.log_steps) && rc.out.empty()) {
    throw UsageError("--render and --log-steps need --out");
  }
  return rc;
}

// ---------------------------------------------------------------------------
// Episode batches

struct Outcome {
  ans::EpisodeMetrics metrics;
  std::optional<ans::Rgb8> image;
};

ans::Rgb8 episode_image(const ans::EpisodeTrace& tr) {
  const ans::Rect view = ans::expand(tr.known, 10);
  return ans::composite_image(*tr.map, view, tr.trajectory, tr.goal);
}

Outcome run_one(const RunConfig& rc, ans::EpisodeConfig cfg, ans::GridWorld world) {
  Outcome o;
  ans::EpisodeTrace trace;
  o.metrics = ans::run_episode(cfg, std::move(world), rc.render ? &trace : nullptr);
  if (rc.render && trace.map) o.image = episode_image(trace);
  return o;
}

ans::GridWorld world_at(const RunConfig& rc, std::size_t i, std::uint64_t seed) {
  if (rc.world_files.empty()) return ans::generate_world(seed, rc.world);
  return ans::load_world(rc.world_files[i % rc.world_files.size()]);
}

// Builds the PointGoal world and config for episode i.
std::pair<ans::GridWorld, ans::EpisodeConfig> pointgoal_episode(const RunConfig& rc, std::size_t i) {
  const std::uint64_t seed = rc.seeds[i];
  ans::EpisodeConfig cfg = rc.episode;
  cfg.seed = seed;
  if (rc.goal) {
    ans::GridWorld w = ans::load_world(rc.world_files.front());
    if (!w.occupancy().in_bounds(*rc.goal)) {
      throw UsageError("--goal " + ans::to_string(*rc.goal) + " is outside the world");
    }
    const ans::Pose start = ans::choose_start(w, seed);
    if (w.is_obstacle(rc.goal->row, rc.goal->col)) {
      throw UsageError("--goal " + ans::to_string(*rc.goal) + " is not free");
    }
    const double l = ans::geodesic_distance(ans::free_mask(w.occupancy()), w.cell_of(start), *rc.goal);
    if (!(l < ans::kInf)) {
      throw ans::GenerationFailure("goal " + ans::to_string(*rc.goal) + " is unreachable from the start");
    }
    w.set_start(start);
    cfg.goal = *rc.goal;
    return {std::move(w), cfg};
  }
  if (rc.world_files.empty()) {
    ans::EpisodeSetParams p;
    p.world = rc.world;
    p.filters = rc.filters;
    const ans::EpisodeSpec e = ans::generate_episode_set(1, seed, p).front();
    ans::GridWorld w = ans::generate_world(e.world_seed, rc.world);
    w.set_start(e.start);
    cfg.goal = e.goal;
    return {std::move(w), cfg};
  }
  ans::GridWorld w = world_at(rc, i, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  const auto e = ans::sample_episode(w, rng, rc.filters, 50);
  if (!e) throw ans::GenerationFailure("no start/goal pair on this world meets the filters");
  w.set_start(e->start);
  cfg.goal = e->goal;
  return {std::move(w), cfg};
}

std::string episode_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "episode_%03zu", i);
  return buf;
}

int run_batch(const RunConfig& rc) {
  const int workers = ans::worker_count(rc.workers);
  const auto outcomes = ans::parallel_map(rc.seeds.size(), workers, [&](std::size_t i) {
    if (rc.task == ans::Task::PointGoal) {
      auto [w, cfg] = pointgoal_episode(rc, i);
      return run_one(rc, cfg, std::move(w));
    }
    ans::EpisodeConfig cfg = rc.episode;
    cfg.seed = rc.seeds[i];
    return run_one(rc, cfg, world_at(rc, i, rc.seeds[i]));
  });

  std::vector<ans::EpisodeMetrics> runs;
  for (const auto& o : outcomes) runs.push_back(o.metrics);
  if (!rc.out.empty()) {
    fs::create_directories(rc.out);
    const fs::path dir(rc.out);
    ans::write_file_atomic((dir / "metrics.csv").string(), ans::metrics_csv(runs, rc.seeds));
    ans::write_file_atomic((dir / "curve.csv").string(), ans::curve_csv(ans::aggregate_metrics(runs)));
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      if (rc.episode.log_steps) {
        ans::write_file_atomic((dir / (episode_stem(i) + ".jsonl")).string(),
                               ans::step_log_jsonl(outcomes[i].metrics.log));
      }
      if (outcomes[i].image) ans::write_png(*outcomes[i].image, (dir / (episode_stem(i) + ".png")).string());
    }
  }

  const ans::MetricsSummary s = ans::aggregate_metrics(runs);
  std::cout << "episodes " << s.episodes << "\n";
  std::cout << "mean Cov " << ans::format_metric(s.cov_m2) << " m2\n";
  std::cout << "mean %Cov " << ans::format_metric(s.pct_cov) << "\n";
  if (rc.task == ans::Task::PointGoal) {
    std::cout << "success " << ans::format_metric(s.success) << "\n";
    std::cout << "mean SPL " << ans::format_metric(s.spl) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Commands

struct FitNoiseArgs {
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  int k_max = 20;
  double split = 1.0 / 6.0;
};

int cmd_fit_noise(const FitNoiseArgs& a) {
  if (a.k_max < 1) throw UsageError("--k-max must be >= 1");
  if (!(a.split > 0.0 && a.split < 1.0)) throw UsageError("--split must lie in (0, 1)");
  const ans::CalibrationDataset data = ans::load_calibration_csv(a.data);
  ans::NoiseFitOptions opt;
  opt.seed = a.seed;
  opt.k_candidates = ans::k_range(1, a.k_max);
  opt.validation_fraction = a.split;
  ans::NoiseFitReport report{};
  const ans::NoiseModelSet set = ans::build_noise_models(data, ans::default_commands(), opt, &report);
  ans::save_models(set, a.out);
  for (ans::Action act : ans::kMotionActions) {
    for (ans::NoiseKind kind : {ans::NoiseKind::Actuation, ans::NoiseKind::Sensor}) {
      const auto& r = report[static_cast<std::size_t>(ans::motion_index(act))][static_cast<std::size_t>(kind)];
      std::cout << ans::action_name(act) << " " << ans::noise_kind_name(kind) << " k=" << r.k
                << " heldout_ll=" << ans::format_metric(r.heldout_log_likelihood) << "\n";
    }
  }
  return 0;
}

struct GenWorldArgs {
  std::uint64_t seed = 0;
  std::string style = "rooms";
  int size = 480;
  double min_area = 16.0;
  double max_area = 100.0;
  double min_free_fraction = 0.0;
  std::string out;
};

ans::WorldParams world_params(const GenWorldArgs& a) {
  ans::WorldParams p;
  const auto st = ans::parse_world_style(a.style);
  if (!st) throw UsageError("--style must be rooms, maze or cave");
  p.style = *st;
  p.size_cells = a.size;
  p.min_area_m2 = a.min_area;
  p.max_area_m2 = a.max_area;
  p.min_free_fraction = a.min_free_fraction;
  if (p.size_cells < 40) throw UsageError("--size must be at least 40 cells");
  if (!(p.min_area_m2 > 0.0 && p.min_area_m2 <= p.max_area_m2)) {
    throw UsageError("--min-area and --max-area must satisfy 0 < min <= max");
  }
  return p;
}

int cmd_gen_world(const GenWorldArgs& a) {
  const ans::GridWorld w = ans::generate_world(a.seed, world_params(a));
  ans::save_world(w, a.out);
  std::cout << "wrote " << a.out << " (" << w.rows() << "x" << w.cols() << ", explorable "
            << ans::format_metric(ans::explorable_area(w)) << " m2)\n";
  return 0;
}

struct RenderArgs {
  GenWorldArgs world;
  std::string world_file;
  int steps = 0;
};

int cmd_render(const RenderArgs& a) {
  ans::GridWorld w = a.world_file.empty() ? ans::generate_world(a.world.seed, world_params(a.world))
                                          : ans::load_world(a.world_file);
  if (a.steps < 0) throw UsageError("--steps must be >= 0");
  if (a.steps == 0) {
    ans::write_png(ans::world_image(w), a.world.out);
  } else {
    ans::EpisodeConfig cfg;
    cfg.seed = a.world.seed;
    cfg.max_steps = a.steps;
    cfg.noise = false;
    ans::EpisodeTrace tr;
    ans::run_episode(cfg, std::move(w), &tr);
    ans::write_png(episode_image(tr), a.world.out);
  }
  std::cout << "wrote " << a.world.out << "\n";
  return 0;
}

struct BenchArgs {
  std::string only;
  int workers = 0;
  bool subrun = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  ans::acceptance::Options o;
  o.workers = a.workers;
  if (a.subrun) {
    const std::string csv = ans::acceptance::bench_subrun(a.seed, ans::worker_count(a.workers));
    if (a.out.empty()) {
      std::cout << csv;
    } else {
      ans::write_file_atomic(a.out, csv);
    }
    return 0;
  }
  std::vector<int> ids;
  const int n = static_cast<int>(ans::acceptance::criteria().size());
  if (a.only.empty()) {
    for (int i = 1; i <= n; ++i) ids.push_back(i);
  } else {
    for (const auto& part : ans::split_csv_line(a.only)) {
      const auto v = ans::parse_int(part);
      if (!v || *v < 1 || *v > n) throw UsageError("--only: no criterion '" + part + "'");
      ids.push_back(static_cast<int>(*v));
    }
  }
  bool all = true;
  double total = 0.0;
  for (int id : ids) {
    const auto r = ans::acceptance::run_criterion(id, o);
    std::cout << ans::acceptance::result_line(r) << std::endl;
    all = all && r.passed;
    total += r.seconds;
  }
  std::cout << (all ? "all passed" : "FAILURES") << " in " << ans::acceptance::fmt("%.1f", total)
            << " s\n";
  return all ? 0 : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-Neural-SLAM style 2D navigation stack"};
  app.require_subcommand(1);

  FitNoiseArgs fit;
  auto* c_fit = app.add_subcommand("fit-noise", "fit the six noise models from a calibration CSV");
  c_fit->add_option("--data", fit.data, "calibration CSV")->required();
  c_fit->add_option("--out", fit.out, "noise model JSON")->required();
  c_fit->add_option("--seed", fit.seed);
  c_fit->add_option("--k-max", fit.k_max, "largest component count tried");
  c_fit->add_option("--split", fit.split, "held-out fraction");

  SettingFlags explore{explore_defaults(), {}, {}, {}, false};
  auto* c_explore = app.add_subcommand("explore", "run exploration episodes");
  explore.attach(c_explore);

  SettingFlags pointgoal{pointgoal_defaults(), {}, {}, {}, false};
  auto* c_pointgoal = app.add_subcommand("pointgoal", "run PointGoal episodes");
  pointgoal.attach(c_pointgoal);

  GenWorldArgs gen;
  auto* c_gen = app.add_subcommand("gen-world", "generate a world file");
  auto add_world_flags = [](CLI::App* c, GenWorldArgs& g) {
    c->add_option("--seed", g.seed);
    c->add_option("--style", g.style, "rooms, maze or cave");
    c->add_option("--size", g.size, "grid side in cells");
    c->add_option("--min-area", g.min_area, "m2");
    c->add_option("--max-area", g.max_area, "m2");
    c->add_option("--min-free-fraction", g.min_free_fraction);
    c->add_option("--out", g.out)->required();
  };
  add_world_flags(c_gen, gen);

  RenderArgs ren;
  auto* c_render = app.add_subcommand("render", "render a world, or the map after a short run, to PNG");
  add_world_flags(c_render, ren.world);
  c_render->add_option("--world", ren.world_file, "world file (default: generate one)");
  c_render->add_option("--steps", ren.steps, "noise-free exploration steps before rendering the map");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "run the acceptance suite");
  c_bench->add_option("--only", bench.only, "comma-separated criterion ids");
  c_bench->add_option("--workers", bench.workers);
  c_bench->add_flag("--subrun", bench.subrun, "only the seeded determinism sub-run; prints its metrics CSV");
  c_bench->add_option("--seed", bench.seed, "seed of the sub-run");
  c_bench->add_option("--out", bench.out, "write the sub-run CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*c_fit) return cmd_fit_noise(fit);
    if (*c_gen) return cmd_gen_world(gen);
    if (*c_render) return cmd_render(ren);
    if (*c_bench) return cmd_bench(bench);
    const bool is_explore = static_cast<bool>(*c_explore);
    const SettingFlags& flags = is_explore ? explore : pointgoal;
    const json merged = flags.merged();
    if (flags.print_config) {
      std::cout << merged.dump(2) << "\n";
      return 0;
    }
    return run_batch(validate(merged, is_explore ? ans::Task::Exploration : ans::Task::PointGoal));
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ans::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ans::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ans::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
