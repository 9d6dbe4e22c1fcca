#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ans/world.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout captured to a file; stderr is discarded.
CliRun run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "ans_cli_test_stdout.txt";
  const std::string cmd = std::string(ANS_CLI_PATH) + " " + args + " > " + log.string() + " 2>/dev/null";
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ans_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("explore --episodes 0").code, 2);
  EXPECT_EQ(run_cli("explore --noise maybe").code, 2);
  EXPECT_EQ(run_cli("explore --style swamp").code, 2);
  EXPECT_EQ(run_cli("pointgoal --goal 3").code, 2);
  EXPECT_EQ(run_cli("explore --world /nonexistent/dir").code, 2);
  EXPECT_EQ(run_cli("bench --only 12").code, 2);
  const std::string world = std::string(ANS_SOURCE_DIR) + "/data/worlds/rooms_1.answ";
  EXPECT_EQ(run_cli("pointgoal --world " + world + " --goal 0,0").code, 2);
}

TEST(Cli, CheckedInConfigsMatchDefaults) {
  for (const std::string task : {"explore", "pointgoal"}) {
    const fs::path cfg = fs::path(ANS_SOURCE_DIR) / "config" / (task + ".json");
    ASSERT_TRUE(fs::exists(cfg)) << cfg;
    const CliRun defaults = run_cli(task + " --print-config");
    const CliRun from_file = run_cli(task + " --config " + cfg.string() + " --print-config");
    ASSERT_EQ(defaults.code, 0);
    ASSERT_EQ(from_file.code, 0);
    EXPECT_EQ(defaults.out, from_file.out) << task;
  }
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "c.json") << R"({"episodes": 3, "noise": false})";
  }
  const CliRun r = run_cli("explore --config " + (dir / "c.json").string() + " --episodes 4 --print-config");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"episodes\": 4"), std::string::npos);
  EXPECT_NE(r.out.find("\"noise\": false"), std::string::npos);
  {
    std::ofstream(dir / "bad.json") << R"({"episode": 3})";
  }
  EXPECT_EQ(run_cli("explore --config " + (dir / "bad.json").string() + " --print-config").code, 2);
  fs::remove_all(dir);
}

TEST(Cli, GenWorldRoundTrips) {
  const fs::path dir = scratch("gen");
  const fs::path a = dir / "a.answ";
  const fs::path b = dir / "b.answ";
  ASSERT_EQ(run_cli("gen-world --seed 11 --size 240 --out " + a.string()).code, 0);
  ASSERT_EQ(run_cli("gen-world --seed 11 --size 240 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  const ans::GridWorld w = ans::load_world(a.string());
  EXPECT_EQ(w.rows(), 240);
  EXPECT_EQ(w.cols(), 240);
  EXPECT_TRUE(w.start().has_value());
  fs::remove_all(dir);
}

TEST(Cli, ShortExplorationWritesOutputs) {
  const fs::path dir = scratch("explore");
  const std::string args = "explore --episodes 2 --seed 3 --max-steps 60 --size 240 --render --log-steps --out " +
                           dir.string();
  const CliRun r = run_cli(args);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("episodes 2"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "metrics.csv"));
  EXPECT_TRUE(fs::exists(dir / "curve.csv"));
  EXPECT_TRUE(fs::exists(dir / "episode_000.png"));
  EXPECT_TRUE(fs::exists(dir / "episode_001.jsonl"));
  const std::string log = slurp(dir / "episode_001.jsonl");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 60);
  // Same seed, same metrics.
  const std::string first = slurp(dir / "metrics.csv");
  ASSERT_EQ(run_cli(args).code, 0);
  EXPECT_EQ(slurp(dir / "metrics.csv"), first);
  fs::remove_all(dir);
}

TEST(Cli, PointGoalOnCheckedInWorld) {
  const fs::path worlds = fs::path(ANS_SOURCE_DIR) / "data" / "worlds";
  ASSERT_TRUE(fs::exists(worlds));
  const CliRun r = run_cli("pointgoal --episodes 2 --seed 1 --noise off --world " + worlds.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("success"), std::string::npos);
  EXPECT_NE(r.out.find("mean SPL"), std::string::npos);
}
