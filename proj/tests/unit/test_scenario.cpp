#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hmlab/error.hpp"
#include "hmlab/field_io.hpp"
#include "hmlab/runner.hpp"
#include "hmlab/scenario.hpp"

using namespace hmlab;
namespace fs = std::filesystem;

namespace {

std::string scenario_path(const std::string& name) { return std::string(HMLAB_SCENARIO_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hmlab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

constexpr const char* kBase = R"({
  "name": "t",
  "boundary": {"kind": "flat", "n": 3, "d": 1, "extent": 16, "spacing": 0.0625},
  "grid": {"box": {"lo": [0, 0, 0], "hi": [2, 2, 2]}, "h": 0.125, "mirror": [true, true, true]},
  "tasks": [TASKS]
})";

std::string with_tasks(const std::string& tasks) {
  std::string s = kBase;
  s.replace(s.find("TASKS"), 5, tasks);
  return s;
}

}  // namespace

TEST(Scenario, ParsesShippedScenarios) {
  for (const char* name : {"constant.json", "flat_line.json", "cantor.json"}) {
    const Scenario s = parse_scenario(scenario_path(name));
    EXPECT_FALSE(s.tasks.empty()) << name;
    EXPECT_NE(s.inputs_hash, 0u);
  }
}

TEST(Scenario, AggregatesValidationProblems) {
  try {
    parse_scenario(scenario_path("invalid.json"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const auto& p = e.problems();
    ASSERT_GE(p.size(), 3u);
    auto has = [&](const std::string& needle) {
      for (const auto& s : p)
        if (s.find(needle) != std::string::npos) return true;
      return false;
    };
    EXPECT_TRUE(has("hausdorff_dim must be < n-1"));
    EXPECT_TRUE(has("does not divide"));
    EXPECT_TRUE(has("unknown task 'harmonic'"));
    EXPECT_TRUE(has("known tasks:"));
  }
}

TEST(Scenario, RejectsUnknownKeysAndReportsParsePosition) {
  EXPECT_THROW(parse_scenario_text(with_tasks(R"({"task": "solve", "colour": 3})")), ValidationError);
  try {
    parse_scenario_text("{\n  \"name\": \"x\",\n  oops\n}");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Scenario, LadderDepthAndSeedOverrides) {
  Scenario s = parse_scenario_text(with_tasks(R"({"task": "solve"})"));
  set_ladder_depth(s, 3);
  ASSERT_EQ(s.tasks[0].ladder.h.size(), 3u);
  EXPECT_DOUBLE_EQ(s.tasks[0].ladder.h[2], 0.125 / 4);
  set_seed(s, 99);
  EXPECT_EQ(s.tasks[0].seed, 99u);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
}

TEST(Runner, ConstantDataSolvesExactly) {
  const Scenario s = parse_scenario(scenario_path("constant.json"));
  const fs::path out = scratch("constant");
  RunOptions o;
  o.output = out.string();
  const RunResult r = run(s, o);
  ASSERT_EQ(r.exit_code, kExitPass);
  const Field f = read_field((out / "fields" / "g-one.field").string());
  for (double v : f.values) EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
}

TEST(Runner, FailedCheckGivesExitTwo) {
  const Scenario s = parse_scenario_text(with_tasks(R"({"task": "geom-check", "radii": [0.5, 1, 2], "budget_c0": 1.0001})"));
  RunOptions o;
  o.output = scratch("check").string();
  const RunResult r = run(s, o);
  EXPECT_EQ(r.exit_code, kExitCheckFailure);
  EXPECT_EQ(r.tasks[0].status, "check_failed");
}

TEST(Runner, TaskErrorGivesExitOne) {
  // The pole is off the mirror planes of the grid.
  const Scenario s = parse_scenario_text(with_tasks(
      R"({"task": "green", "poles": [{"y": [0.5, 1, 0.5]}]}, {"task": "geom-check", "radii": [0.5, 1]})"));
  RunOptions o;
  o.output = scratch("error").string();
  const RunResult r = run(s, o);
  EXPECT_EQ(r.exit_code, kExitError);
  EXPECT_EQ(r.tasks[0].status, "error");
  EXPECT_FALSE(r.tasks[0].error.empty());
  EXPECT_EQ(r.tasks[1].status, "ok");
}

TEST(Runner, RerunsAreByteIdenticalApartFromManifest) {
  const Scenario s = parse_scenario_text(with_tasks(
      R"({"task": "solve", "name": "ind", "data": {"kind": "indicator", "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}}},
         {"task": "mc", "name": "walk", "x0": [0, 1, 0], "paths": 200,
          "groups": {"boxes": [{"name": "E", "box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}}]}})"));
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  RunOptions o;
  o.output = a.string();
  ASSERT_EQ(run(s, o).exit_code, kExitPass);
  o.output = b.string();
  o.jobs = 2;
  ASSERT_EQ(run(s, o).exit_code, kExitPass);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    const fs::path rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  EXPECT_GT(compared, 2);
}
