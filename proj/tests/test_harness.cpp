#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "abpr/harness.hpp"
#include "abpr/parser.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "json.hpp"

using namespace abpr::harness;
using abpr::Error;
using abpr::ErrorKind;
using abpr::Rng;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("abpr_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("load_task: minimal one-pair file") {
  auto dir = scratch_dir("load_min");
  {
    std::ofstream f(dir / "tiny.json");
    f << R"({"train":[{"input":[[1]],"output":[[1]]}],"test":[{"input":[[1]],"output":[[1]]}]})";
  }
  LoadedTask lt = load_task((dir / "tiny.json").string());
  CHECK(lt.task.task_id == "tiny");
  REQUIRE(lt.task.train.size() == 1);
  CHECK(lt.task.train[0].input.rows == 1);
  CHECK(lt.task.train[0].input.cols == 1);
  // 1 training pair is outside 2-5: accepted with a warning.
  CHECK(lt.warnings.size() == 1);
}

TEST_CASE("load_task: grid invariant violations") {
  CHECK_THROWS_AS(parse_task(R"({"train":[{"input":[[10]],"output":[[1]]}],"test":[]})", "x"),
                  Error);
  try {
    parse_task(R"({"train":[{"input":[[10]],"output":[[1]]}],"test":[]})", "x");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridInvariant);
  }
  try {
    parse_task("not json at all", "x");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
  try {
    parse_task(R"({"train":[{"input":[[1],[2,3]],"output":[[1]]}],"test":[]})", "x");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridInvariant);
  }
}

TEST_CASE("task round trip: load then re-serialize is byte-equal") {
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    TaskRecord t;
    t.task_id = "roundtrip";
    size_t train = 2 + rng.below(3);
    for (size_t j = 0; j < train; ++j)
      t.train.push_back({testsupport::random_grid(rng, 6), testsupport::random_grid(rng, 6)});
    size_t test = 1 + rng.below(2);
    for (size_t j = 0; j < test; ++j) {
      TaskRecord::TestPair tp;
      tp.input = testsupport::random_grid(rng, 6);
      if (rng.below(2) == 0) tp.expected = testsupport::random_grid(rng, 6);
      t.test.push_back(tp);
    }
    std::string one = serialize_task(t);
    LoadedTask lt = parse_task(one, "roundtrip");
    CHECK(serialize_task(lt.task) == one);
  }
}

TEST_CASE("config json round trip") {
  RunConfig c;
  c.t_max = 7;
  c.k = 3;
  c.n_instances = 2;
  c.base_seed = 99;
  c.mode = RunConfig::Mode::Mock;
  c.mock_script_path = "s.json";
  c.base_selection = RunConfig::BaseSelection::Best;
  RunConfig back = config_from_json(config_to_json(c));
  CHECK(back.t_max == 7);
  CHECK(back.k == 3);
  CHECK(back.n_instances == 2);
  CHECK(back.base_seed == 99);
  CHECK(back.mock_script_path == "s.json");
  CHECK(back.base_selection == RunConfig::BaseSelection::Best);
  CHECK_THROWS_AS(config_from_json("{\"t_max\": 0}"), Error);
  CHECK_THROWS_AS(config_from_json("{\"mode\": \"weird\"}"), Error);
}

TEST_CASE("mock-mode suite reproduces the designed pass@2 and curve") {
  auto dir = scratch_dir("mock_suite");
  auto suite_fixture = testsupport::build_mock_suite(dir.string(), 42);

  RunConfig config;  // paper defaults: t_max=10, k=2, n=8, temperature 1.0
  config.base_seed = 42;
  config.mode = RunConfig::Mode::Mock;
  config.mock_script_path = suite_fixture.script_path;
  config.refiner_backoff_ms = 0;
  REQUIRE(config.t_max == 10);
  REQUIRE(config.k == 2);
  REQUIRE(config.n_instances == 8);
  REQUIRE(config.temperature == 1.0);

  SuiteResult suite = run_directory(suite_fixture.tasks_dir, config);
  CHECK(suite.scored == suite_fixture.total_scored);
  CHECK(suite.solved == suite_fixture.designed_solved);

  // Solved tasks surfaced at their designed iterations.
  for (const auto& t : suite.tasks) {
    auto it = suite_fixture.designed_iteration.find(t.task_id);
    if (it != suite_fixture.designed_iteration.end()) {
      CHECK(t.pass2.has_value());
      CHECK(*t.pass2);
      CHECK(t.solve_iteration == it->second);
    } else {
      CHECK_FALSE(*t.pass2);
    }
  }

  // Curve: non-decreasing, ends at the aggregate solved count.
  for (size_t i = 1; i < suite.curve.size(); ++i) CHECK(suite.curve[i] >= suite.curve[i - 1]);
  CHECK(suite.curve.back() == suite.solved);

  // Persistence: results + csv + config snapshot.
  write_results(suite, config, (dir / "out").string());
  CHECK(fs::exists(dir / "out" / "results.jsonl"));
  CHECK(fs::exists(dir / "out" / "runs.jsonl"));
  CHECK(fs::exists(dir / "out" / "summary.csv"));
  CHECK(fs::exists(dir / "out" / "config.json"));

  ReportSummary rs = report_from_file((dir / "out" / "results.jsonl").string());
  CHECK(rs.solved == suite.solved);
  CHECK(rs.total == suite.scored);
  CHECK(rs.text.find("60.00%") != std::string::npos);

  std::string csv = testsupport::read_file((dir / "out" / "summary.csv").string());
  CHECK(csv.rfind("iteration,cumulative_solved,rate\n", 0) == 0);

  // The snapshot reproduces the run configuration.
  RunConfig back = config_from_json(testsupport::read_file((dir / "out" / "config.json").string()));
  CHECK(back.base_seed == config.base_seed);
  CHECK(back.t_max == config.t_max);

  // Determinism: a second full run yields identical records modulo timing.
  SuiteResult again = run_directory(suite_fixture.tasks_dir, config);
  REQUIRE(again.tasks.size() == suite.tasks.size());
  for (size_t i = 0; i < suite.tasks.size(); ++i) {
    CHECK(suite.tasks[i].task_id == again.tasks[i].task_id);
    CHECK(suite.tasks[i].pass2 == again.tasks[i].pass2);
    CHECK(suite.tasks[i].selected_digests == again.tasks[i].selected_digests);
    CHECK(suite.tasks[i].solve_iteration == again.tasks[i].solve_iteration);
  }
}

TEST_CASE("report math: three of six prints 50.00%") {
  auto dir = scratch_dir("report");
  {
    std::ofstream f(dir / "results.jsonl");
    for (int i = 0; i < 6; ++i)
      f << R"({"task_id":"t)" << i << R"(","pass_at_2":)" << (i < 3 ? "true" : "false") << "}\n";
  }
  ReportSummary rs = report_from_file((dir / "results.jsonl").string());
  CHECK(rs.solved == 3);
  CHECK(rs.total == 6);
  CHECK(rs.rational == "3/6");
  CHECK(rs.text.find("50.00%") != std::string::npos);
}

TEST_CASE("hidden-eval tasks produce predictions and no pass@2") {
  TaskRecord task = testsupport::mock_task(1);
  for (auto& t : task.test) t.expected.reset();
  RunConfig config;
  config.n_instances = 1;
  config.t_max = 1;
  config.refiner_backoff_ms = 0;
  auto factory = [&](unsigned long long) {
    return std::make_unique<abpr::refine::ScriptedRefiner>(
        testsupport::mock_correct_program(1), std::vector<std::string>{});
  };
  TaskResult r = solve_task(task, config, factory);
  CHECK_FALSE(r.pass2.has_value());
  REQUIRE(r.predictions.size() == 1);
  REQUIRE(r.predictions[0].size() == task.test.size());
  CHECK(r.predictions[0][0].find("(no prediction)") == std::string::npos);
}

TEST_CASE("interactive oracle session: root buggy when children valid") {
  TaskRecord task = testsupport::mock_task(1);
  auto program = abpr::logic::parse_program(
      "solve(X, Y) :- transform(X, Y).\ntransform(X, X).");
  RunConfig config;
  // Answers: root invalid (n), transform child valid (y).
  std::istringstream in("n\ny\n");
  std::ostringstream out;
  int buggy = interactive_oracle_session(task, program, config, in, out);
  CHECK(buggy == 1);
  CHECK(out.str().find("Buggy nodes (1):") != std::string::npos);
  CHECK(out.str().find("solve(") != std::string::npos);
}

TEST_CASE("interactive oracle session: valid root ends immediately") {
  TaskRecord task = testsupport::mock_task(1);
  auto program = abpr::logic::parse_program("solve(X, X).");
  RunConfig config;
  std::istringstream in("y\n");
  std::ostringstream out;
  int buggy = interactive_oracle_session(task, program, config, in, out);
  CHECK(buggy == 0);
  CHECK(out.str().find("No buggy node under root.") != std::string::npos);
}

TEST_CASE("interactive oracle session: scripted replay is deterministic") {
  TaskRecord task = testsupport::mock_task(1);
  auto program = abpr::logic::parse_program(
      "solve(X, Y) :- step1(X, M), step2(M, Y).\n"
      "step1(X, X).\nstep2(X, X).");
  RunConfig config;
  auto run_once = [&] {
    std::istringstream in("n\nn\ny\nu\ny\n");
    std::ostringstream out;
    interactive_oracle_session(task, program, config, in, out);
    return out.str();
  };
  std::string a = run_once();
  std::string b = run_once();
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("interactive oracle session: EOF aborts") {
  TaskRecord task = testsupport::mock_task(1);
  auto program = abpr::logic::parse_program("solve(X, X).");
  RunConfig config;
  std::istringstream in("");
  std::ostringstream out;
  try {
    interactive_oracle_session(task, program, config, in, out);
    FAIL("expected SessionAborted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SessionAborted);
  }
}

TEST_CASE("correct program on every pair leaves nothing to debug") {
  TaskRecord task = testsupport::mock_task(1);
  auto program = abpr::logic::parse_program(testsupport::mock_correct_program(1));
  RunConfig config;
  std::istringstream in("");
  std::ostringstream out;
  int buggy = interactive_oracle_session(task, program, config, in, out);
  CHECK(buggy == 0);
  CHECK(out.str().find("nothing to debug") != std::string::npos);
}
