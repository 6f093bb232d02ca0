#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "abpr/abpr.h"
#include "fixtures.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Str {
  char* s = nullptr;
  ~Str() { abpr_string_free(s); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(abpr_version()) == "1.0.0");
  CHECK(std::string(abpr_status_name(ABPR_OK)) == "ok");
  CHECK(std::string(abpr_status_name(ABPR_E_SYNTAX)) == "syntax");
}

TEST_CASE("program parse, render, and errors") {
  abpr_program* p = nullptr;
  REQUIRE(abpr_program_parse("f(a).\ng(X) :- f(X).", &p) == ABPR_OK);
  Str rendered;
  REQUIRE(abpr_program_render(p, &rendered.s) == ABPR_OK);
  CHECK(std::string(rendered.s).find("g(_G") != std::string::npos);
  abpr_program_free(p);

  abpr_program* bad = nullptr;
  CHECK(abpr_program_parse("f(a", &bad) == ABPR_E_SYNTAX);
  CHECK(std::string(abpr_last_error()).find("column") != std::string::npos);
  CHECK(abpr_program_parse("a :- assert(b).", &bad) == ABPR_E_UNSUPPORTED);
  CHECK(abpr_program_parse(nullptr, &bad) == ABPR_E_INVALID_ARG);
}

TEST_CASE("exec runs solve/2 on a grid") {
  abpr_program* p = nullptr;
  std::string src = testsupport::read_file(testsupport::corpus_path("recolor_simple.pl"));
  REQUIRE(abpr_program_parse(src.c_str(), &p) == ABPR_OK);
  abpr_limits lim = abpr_default_limits();
  Str out;
  REQUIRE(abpr_exec(p, "[[8,1],[0,8]]", &lim, &out.s) == ABPR_OK);
  CHECK(std::string(out.s) == "[[0,1],[0,0]]");
  abpr_program_free(p);

  abpr_program* failing = nullptr;
  REQUIRE(abpr_program_parse("solve(_, _) :- fail.", &failing) == ABPR_OK);
  Str none;
  CHECK(abpr_exec(failing, "[[1]]", &lim, &none.s) == ABPR_E_NO_SOLUTION);
  abpr_program_free(failing);
}

TEST_CASE("trace renders a proof tree") {
  abpr_program* p = nullptr;
  REQUIRE(abpr_program_parse("p :- q, r.\nq.\nr.", &p) == ABPR_OK);
  abpr_limits lim = abpr_default_limits();
  Str text;
  REQUIRE(abpr_trace_goal(p, "p", &lim, 100, &text.s) == ABPR_OK);
  std::string t(text.s);
  CHECK(t.find("✓ p") != std::string::npos);
  CHECK(t.find("✓ q") != std::string::npos);

  Str fail_text;
  REQUIRE(abpr_trace_goal(p, "nosuch", &lim, 100, &fail_text.s) == ABPR_OK);
  CHECK(std::string(fail_text.s).find("failure witness") != std::string::npos);
  abpr_program_free(p);
}

TEST_CASE("task load and info") {
  fs::path dir = fs::temp_directory_path() / "abpr_capi";
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "t1.json");
    f << R"({"train":[{"input":[[1]],"output":[[2]]},{"input":[[3]],"output":[[4]]}],)"
      << R"("test":[{"input":[[5]],"output":[[6]]}]})";
  }
  abpr_task* task = nullptr;
  REQUIRE(abpr_task_load((dir / "t1.json").string().c_str(), &task) == ABPR_OK);
  Str info;
  REQUIRE(abpr_task_info(task, &info.s) == ABPR_OK);
  auto j = nlohmann::json::parse(info.s);
  CHECK(j["train_pairs"] == 2);
  CHECK(j["test_pairs"] == 1);
  CHECK(j["has_expected"] == true);
  abpr_task_free(task);

  abpr_task* missing = nullptr;
  CHECK(abpr_task_load("/nonexistent/task.json", &missing) == ABPR_E_IO);
}

TEST_CASE("solve_task over the C API in mock mode") {
  fs::path dir = fs::temp_directory_path() / "abpr_capi_solve";
  fs::remove_all(dir);
  auto suite = testsupport::build_mock_suite(dir.string(), 42);

  abpr_task* task = nullptr;
  REQUIRE(abpr_task_load((fs::path(suite.tasks_dir) / "mock01.json").string().c_str(), &task) ==
          ABPR_OK);
  nlohmann::json cfg;
  cfg["mode"] = "mock";
  cfg["mock_script"] = suite.script_path;
  cfg["base_seed"] = 42;
  cfg["refiner_backoff_ms"] = 0;
  Str result;
  REQUIRE(abpr_solve_task(task, cfg.dump().c_str(), &result.s) == ABPR_OK);
  auto j = nlohmann::json::parse(result.s);
  CHECK(j["pass_at_2"] == true);
  CHECK(j["runs"].size() == 8);
  abpr_task_free(task);
}

TEST_CASE("run_dir writes results and report reads them back") {
  fs::path dir = fs::temp_directory_path() / "abpr_capi_run";
  fs::remove_all(dir);
  auto suite = testsupport::build_mock_suite(dir.string(), 42);
  // Two-task subset for speed.
  fs::path small = dir / "small";
  fs::create_directories(small);
  fs::copy(fs::path(suite.tasks_dir) / "mock01.json", small / "mock01.json");
  fs::copy(fs::path(suite.tasks_dir) / "mock07.json", small / "mock07.json");

  nlohmann::json cfg;
  cfg["mode"] = "mock";
  cfg["mock_script"] = suite.script_path;
  cfg["base_seed"] = 42;
  cfg["refiner_backoff_ms"] = 0;
  Str summary;
  std::string out_dir = (dir / "out").string();
  REQUIRE(abpr_run_dir(small.string().c_str(), cfg.dump().c_str(), out_dir.c_str(),
                       &summary.s) == ABPR_OK);
  auto j = nlohmann::json::parse(summary.s);
  CHECK(j["tasks"] == 2);
  CHECK(j["solved"] == 1);

  Str report;
  std::string results = (fs::path(out_dir) / "results.jsonl").string();
  REQUIRE(abpr_report(results.c_str(), &report.s) == ABPR_OK);
  auto r = nlohmann::json::parse(report.s);
  CHECK(r["solved"] == 1);
  CHECK(r["total"] == 2);
  CHECK(r["rational"] == "1/2");
}
