// Command-line front end. Talks to the engine exclusively through the C API
// in abpr/abpr.h; presentation-only helpers (argument parsing, JSON pretty
// printing) come from vendored headers.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "abpr/abpr.h"
#include "json.hpp"

using nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 task-level errors, 2 fatal configuration/usage.
constexpr int kOk = 0;
constexpr int kTaskError = 1;
constexpr int kFatal = 2;

struct CommonOpts {
  long long max_iters = 10;
  long long buffer_k = 2;
  long long threads = 8;
  unsigned long long seed = 1;
  std::string provider = "openai";
  std::string model;
  std::string mode = "mock";
  std::string mock_script;
  long long budget = 60000;
  long long step_limit = 2000000;
  long long depth_limit = 2048;
  long long timeout_ms = 10000;
  std::string base_selection = "latest";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--max-iters", o.max_iters, "Refinement steps per run (default 10)");
  cmd->add_option("--buffer-k", o.buffer_k, "History buffer capacity (default 2)");
  cmd->add_option("--threads", o.threads, "Parallel runs per task (default 8)");
  cmd->add_option("--seed", o.seed, "Base seed; run i uses seed+i");
  cmd->add_option("--provider", o.provider, "Provider id (credentials via <PROVIDER>_API_KEY)");
  cmd->add_option("--model", o.model, "Model id");
  cmd->add_option("--mode", o.mode, "live | mock | interactive (default mock)");
  cmd->add_option("--mock-script", o.mock_script, "Canned-response script for mock mode");
  cmd->add_option("--budget", o.budget, "Fix prompt character budget");
  cmd->add_option("--step-limit", o.step_limit, "Resolution step limit");
  cmd->add_option("--depth-limit", o.depth_limit, "Derivation depth limit");
  cmd->add_option("--timeout-ms", o.timeout_ms, "Per-execution wall timeout");
  cmd->add_option("--base-selection", o.base_selection, "latest | best");
}

std::string config_json_of(const CommonOpts& o) {
  json j;
  j["t_max"] = o.max_iters;
  j["k"] = o.buffer_k;
  j["n_instances"] = o.threads;
  j["base_seed"] = o.seed;
  j["provider"] = o.provider;
  j["model"] = o.model;
  j["mode"] = o.mode;
  j["mock_script"] = o.mock_script;
  j["prompt_budget"] = o.budget;
  j["max_steps"] = o.step_limit;
  j["max_depth"] = o.depth_limit;
  j["timeout_ms"] = o.timeout_ms;
  j["base_selection"] = o.base_selection;
  return j.dump();
}

abpr_limits limits_of(const CommonOpts& o) {
  return abpr_limits{o.step_limit, o.depth_limit, o.timeout_ms};
}

int fatal(abpr_status st, const char* what) {
  std::fprintf(stderr, "error: %s: %s: %s\n", what, abpr_status_name(st), abpr_last_error());
  return st == ABPR_E_CONFIG || st == ABPR_E_INVALID_ARG || st == ABPR_E_IO ? kFatal : kTaskError;
}

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream f(path);
  if (!f) {
    ok = false;
    return {};
  }
  std::stringstream ss;
  ss << f.rdbuf();
  ok = true;
  return ss.str();
}

void print_grid_json(const std::string& grid_json) {
  json rows = json::parse(grid_json);
  for (const auto& row : rows) {
    bool first = true;
    for (const auto& cell : row) {
      if (!first) std::printf(" ");
      std::printf("%d", cell.get<int>());
      first = false;
    }
    std::printf("\n");
  }
}

struct ProgramHandle {
  abpr_program* p = nullptr;
  ~ProgramHandle() { abpr_program_free(p); }
};

struct TaskHandle {
  abpr_task* t = nullptr;
  ~TaskHandle() { abpr_task_free(t); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { abpr_string_free(s); }
};

int load_program(const std::string& path, ProgramHandle& out) {
  bool ok = false;
  std::string source = read_file(path, ok);
  if (!ok) {
    std::fprintf(stderr, "error: cannot read program file: %s\n", path.c_str());
    return kFatal;
  }
  abpr_status st = abpr_program_parse(source.c_str(), &out.p);
  if (st != ABPR_OK) return fatal(st, "parse");
  return kOk;
}

int cmd_run(const std::string& tasks_dir, const std::string& out_dir, const CommonOpts& o) {
  OwnedString summary;
  abpr_status st =
      abpr_run_dir(tasks_dir.c_str(), config_json_of(o).c_str(), out_dir.c_str(), &summary.s);
  if (st != ABPR_OK) return fatal(st, "run");
  json j = json::parse(summary.s);
  std::printf("tasks: %lld  scored: %lld  solved: %lld  pass@2: %.2f%%\n",
              j["tasks"].get<long long>(), j["scored"].get<long long>(),
              j["solved"].get<long long>(), j["rate_percent"].get<double>());
  std::printf("results written to %s\n", out_dir.c_str());
  return kOk;
}

int cmd_solve(const std::string& task_file, const std::string& program_file,
              const CommonOpts& o) {
  TaskHandle task;
  abpr_status st = abpr_task_load(task_file.c_str(), &task.t);
  if (st != ABPR_OK) return fatal(st, "load task");
  {
    OwnedString info;
    if (abpr_task_info(task.t, &info.s) == ABPR_OK) {
      json j = json::parse(info.s);
      std::printf("task %s: %lld train pairs, %lld test pairs\n",
                  j["task_id"].get<std::string>().c_str(), j["train_pairs"].get<long long>(),
                  j["test_pairs"].get<long long>());
      for (const auto& w : j["warnings"]) std::fprintf(stderr, "warning: %s\n",
                                                       w.get<std::string>().c_str());
    }
  }

  if (o.mode == "interactive") {
    if (program_file.empty()) {
      std::fprintf(stderr, "error: --mode interactive needs --program FILE\n");
      return kFatal;
    }
    ProgramHandle prog;
    if (int rc = load_program(program_file, prog); rc != kOk) return rc;
    int buggy = 0;
    st = abpr_interactive_debug(prog.p, task.t, config_json_of(o).c_str(), &buggy);
    if (st != ABPR_OK) return fatal(st, "interactive session");
    return kOk;
  }

  OwnedString result;
  st = abpr_solve_task(task.t, config_json_of(o).c_str(), &result.s);
  if (st != ABPR_OK) return fatal(st, "solve");
  json j = json::parse(result.s);
  std::printf("\nper-run results:\n");
  for (const auto& r : j["runs"]) {
    if (r["ok"].get<bool>())
      std::printf("  seed %llu: coverage %lld at t=%lld%s\n",
                  r["seed"].get<unsigned long long>(), r["coverage"].get<long long>(),
                  r["timestamp"].get<long long>(),
                  r["consistent"].get<bool>() ? " (consistent)" : "");
    else
      std::printf("  seed %llu: failed (%s)\n", r["seed"].get<unsigned long long>(),
                  r.value("error", "?").c_str());
  }
  std::printf("vote groups:\n");
  for (const auto& g : j["groups"])
    std::printf("  signature %s: %zu member(s), best coverage %lld%s\n",
                g["signature"].get<std::string>().c_str(), g["members"].size(),
                g["best_coverage"].get<long long>(),
                g["bottom"].get<bool>() ? " (execution failure)" : "");
  if (!j["pass_at_2"].is_null())
    std::printf("pass@2: %s\n", j["pass_at_2"].get<bool>() ? "true" : "false");
  else if (j.contains("predictions"))
    for (const auto& sel : j["predictions"])
      for (const auto& p : sel) std::printf("prediction:\n%s", p.get<std::string>().c_str());
  std::printf("%s\n", result.s);
  return !j["pass_at_2"].is_null() && !j["pass_at_2"].get<bool>() ? kTaskError : kOk;
}

int cmd_trace(const std::string& program_file, const std::string& goal, long long max_nodes,
              const CommonOpts& o) {
  ProgramHandle prog;
  if (int rc = load_program(program_file, prog); rc != kOk) return rc;
  abpr_limits lim = limits_of(o);
  OwnedString text;
  abpr_status st = abpr_trace_goal(prog.p, goal.c_str(), &lim, max_nodes, &text.s);
  if (st != ABPR_OK) return fatal(st, "trace");
  std::printf("%s", text.s);
  return kOk;
}

int cmd_exec(const std::string& program_file, const std::string& input_file,
             const CommonOpts& o) {
  ProgramHandle prog;
  if (int rc = load_program(program_file, prog); rc != kOk) return rc;
  bool ok = false;
  std::string grid = read_file(input_file, ok);
  if (!ok) {
    std::fprintf(stderr, "error: cannot read grid file: %s\n", input_file.c_str());
    return kFatal;
  }
  // Accept either bare rows or a {"input": rows} wrapper.
  try {
    json j = json::parse(grid);
    if (j.is_object() && j.contains("input")) grid = j["input"].dump();
  } catch (const json::exception&) {
    std::fprintf(stderr, "error: input file is not valid JSON\n");
    return kFatal;
  }
  abpr_limits lim = limits_of(o);
  OwnedString out;
  abpr_status st = abpr_exec(prog.p, grid.c_str(), &lim, &out.s);
  if (st != ABPR_OK) return fatal(st, "exec");
  print_grid_json(out.s);
  return kOk;
}

int cmd_report(const std::string& results_file) {
  OwnedString summary;
  abpr_status st = abpr_report(results_file.c_str(), &summary.s);
  if (st != ABPR_OK) return fatal(st, "report");
  json j = json::parse(summary.s);
  std::printf("%s", j["text"].get<std::string>().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABPR: iterative logic-program repair on ARC grid tasks"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* run = app.add_subcommand("run", "Evaluate every task in a directory");
  std::string tasks_dir, out_dir = "abpr-out";
  run->add_option("--tasks", tasks_dir, "Directory of ARC task .json files")->required();
  run->add_option("--out", out_dir, "Output directory for results");
  add_common(run, opts);

  auto* solve = app.add_subcommand("solve", "Solve one task verbosely");
  std::string task_file, program_file;
  solve->add_option("--task", task_file, "ARC task .json file")->required();
  solve->add_option("--program", program_file, "Program file (interactive mode)");
  add_common(solve, opts);

  auto* trace = app.add_subcommand("trace", "Print the proof tree of a goal");
  std::string trace_program, goal;
  long long max_nodes = 800;
  trace->add_option("--program", trace_program, "Program file")->required();
  trace->add_option("--goal", goal, "Goal text, e.g. 'solve([[1]], Out)'")->required();
  trace->add_option("--max-nodes", max_nodes, "Node budget for rendering");
  add_common(trace, opts);

  auto* exec = app.add_subcommand("exec", "Run solve/2 on a grid and print the output");
  std::string exec_program, input_file;
  exec->add_option("--program", exec_program, "Program file")->required();
  exec->add_option("--input", input_file, "Grid JSON file")->required();
  add_common(exec, opts);

  auto* report = app.add_subcommand("report", "Recompute aggregates from results.jsonl");
  std::string results_file;
  report->add_option("--results", results_file, "results.jsonl path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kFatal;
  }

  try {
    if (run->parsed()) return cmd_run(tasks_dir, out_dir, opts);
    if (solve->parsed()) return cmd_solve(task_file, program_file, opts);
    if (trace->parsed()) return cmd_trace(trace_program, goal, max_nodes, opts);
    if (exec->parsed()) return cmd_exec(exec_program, input_file, opts);
    if (report->parsed()) return cmd_report(results_file);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFatal;
  }
  return kFatal;
}
