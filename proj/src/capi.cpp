#include "abpr/abpr.h"

#include <cstring>
#include <iostream>
#include <sstream>

#include "abpr/harness.hpp"
#include "abpr/parser.hpp"
#include "abpr/util.hpp"
#include "json.hpp"

using nlohmann::json;

struct abpr_program {
  abpr::logic::Program value;
};

struct abpr_task {
  abpr::harness::TaskRecord value;
  std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

abpr_status status_of(const abpr::Error& e) {
  using abpr::ErrorKind;
  switch (e.kind()) {
    case ErrorKind::Syntax: return ABPR_E_SYNTAX;
    case ErrorKind::UnsupportedFeature: return ABPR_E_UNSUPPORTED;
    case ErrorKind::ResourceSteps:
    case ErrorKind::ResourceDepth:
    case ErrorKind::ResourceTimeout: return ABPR_E_RESOURCE;
    case ErrorKind::Type:
    case ErrorKind::InvalidMatcher:
    case ErrorKind::CallableExpected: return ABPR_E_TYPE;
    case ErrorKind::Format:
    case ErrorKind::GridInvariant: return ABPR_E_FORMAT;
    case ErrorKind::Io: return ABPR_E_IO;
    case ErrorKind::Config: return ABPR_E_CONFIG;
    case ErrorKind::SessionAborted: return ABPR_E_ABORTED;
    default: return ABPR_E_RUNTIME;
  }
}

template <typename F>
abpr_status guarded(F&& fn) {
  try {
    return fn();
  } catch (const abpr::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ABPR_E_RUNTIME;
  }
}

abpr::logic::ResourceLimits to_limits(const abpr_limits* limits) {
  abpr::logic::ResourceLimits out;
  if (limits) {
    out.max_steps = limits->max_steps;
    out.max_depth = limits->max_depth;
    out.timeout_ms = limits->timeout_ms;
  }
  return out;
}

}  // namespace

extern "C" {

const char* abpr_version(void) { return "1.0.0"; }

const char* abpr_status_name(abpr_status status) {
  switch (status) {
    case ABPR_OK: return "ok";
    case ABPR_E_INVALID_ARG: return "invalid_arg";
    case ABPR_E_SYNTAX: return "syntax";
    case ABPR_E_UNSUPPORTED: return "unsupported_feature";
    case ABPR_E_RESOURCE: return "resource_exhausted";
    case ABPR_E_TYPE: return "type_error";
    case ABPR_E_FORMAT: return "format";
    case ABPR_E_IO: return "io";
    case ABPR_E_CONFIG: return "config";
    case ABPR_E_NO_SOLUTION: return "no_solution";
    case ABPR_E_RUNTIME: return "runtime";
    case ABPR_E_ABORTED: return "aborted";
  }
  return "unknown";
}

const char* abpr_last_error(void) { return g_last_error.c_str(); }

void abpr_string_free(char* s) { std::free(s); }

abpr_limits abpr_default_limits(void) {
  abpr::logic::ResourceLimits d;
  return {d.max_steps, d.max_depth, d.timeout_ms};
}

abpr_status abpr_program_parse(const char* source, abpr_program** out) {
  if (!source || !out) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    auto* p = new abpr_program{abpr::logic::parse_program(source)};
    *out = p;
    return ABPR_OK;
  });
}

void abpr_program_free(abpr_program* program) { delete program; }

abpr_status abpr_program_render(const abpr_program* program, char** out) {
  if (!program || !out) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    *out = dup_string(abpr::logic::render_program(program->value));
    return ABPR_OK;
  });
}

abpr_status abpr_exec(const abpr_program* program, const char* input_grid_json,
                      const abpr_limits* limits, char** output_grid_json) {
  if (!program || !input_grid_json || !output_grid_json) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&]() -> abpr_status {
    json rows;
    try {
      rows = json::parse(input_grid_json);
    } catch (const json::exception& e) {
      throw abpr::Error(abpr::ErrorKind::Format, std::string("bad grid JSON: ") + e.what());
    }
    std::vector<std::vector<int>> data;
    for (const auto& row : rows) data.push_back(row.get<std::vector<int>>());
    abpr::bk::Grid grid = abpr::bk::Grid::from_rows(data);

    const auto& prog = program->value;
    abpr::logic::TermPtr out_var = abpr::logic::mk_var("Output", prog.var_counter);
    abpr::logic::TermPtr goal =
        abpr::logic::mk_compound("solve", {abpr::bk::grid_to_term(grid), out_var});
    abpr::logic::Solver solver(prog, to_limits(limits));
    std::optional<abpr::bk::Grid> produced;
    bool solved = false;
    solver.solve(goal, [&](abpr::logic::Solver& s) {
      solved = true;
      produced = abpr::bk::grid_from_term(s.store().resolve(out_var));
      return true;
    });
    if (!solved) {
      g_last_error = "solve/2 found no solution for the input grid";
      return ABPR_E_NO_SOLUTION;
    }
    if (!produced) {
      g_last_error = "solve/2 bound Output to a term that is not a grid";
      return ABPR_E_TYPE;
    }
    json out_rows = json::array();
    for (const auto& row : produced->to_rows()) out_rows.push_back(row);
    *output_grid_json = dup_string(out_rows.dump());
    return ABPR_OK;
  });
}

abpr_status abpr_trace_goal(const abpr_program* program, const char* goal_text,
                            const abpr_limits* limits, long long max_nodes, char** rendered) {
  if (!program || !goal_text || !rendered) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&]() -> abpr_status {
    const auto& prog = program->value;
    abpr::logic::TermPtr goal = abpr::logic::parse_term(goal_text, prog.var_counter);
    abpr::trace::TraceRenderOptions opts;
    if (max_nodes > 0) opts.max_nodes = static_cast<size_t>(max_nodes);
    try {
      auto traced = abpr::trace::solve_traced(prog, goal, to_limits(limits));
      if (traced.tree) {
        *rendered = dup_string(abpr::trace::render_trace(*traced.tree, opts));
      } else if (traced.failure) {
        *rendered = dup_string("(no solution - failure witness)\n" +
                               abpr::trace::render_trace(*traced.failure, opts));
      } else {
        *rendered = dup_string("(no solution)\n");
      }
      return ABPR_OK;
    } catch (const abpr::trace::TraceExhausted& e) {
      *rendered = dup_string(std::string("(resource limit: ") + e.resource_name() +
                             " - partial tree)\n" +
                             abpr::trace::render_trace(e.partial_tree, opts));
      return ABPR_OK;
    }
  });
}

abpr_status abpr_task_load(const char* path, abpr_task** out) {
  if (!path || !out) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    auto loaded = abpr::harness::load_task(path);
    *out = new abpr_task{std::move(loaded.task), std::move(loaded.warnings)};
    return ABPR_OK;
  });
}

abpr_status abpr_task_parse(const char* json_text, const char* task_id, abpr_task** out) {
  if (!json_text || !out) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    auto loaded = abpr::harness::parse_task(json_text, task_id ? task_id : "task");
    *out = new abpr_task{std::move(loaded.task), std::move(loaded.warnings)};
    return ABPR_OK;
  });
}

void abpr_task_free(abpr_task* task) { delete task; }

abpr_status abpr_task_info(const abpr_task* task, char** info_json) {
  if (!task || !info_json) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    json j;
    j["task_id"] = task->value.task_id;
    j["train_pairs"] = task->value.train.size();
    j["test_pairs"] = task->value.test.size();
    j["has_expected"] = task->value.has_all_expected();
    j["warnings"] = task->warnings;
    *info_json = dup_string(j.dump());
    return ABPR_OK;
  });
}

abpr_status abpr_solve_task(const abpr_task* task, const char* config_json, char** result_json) {
  if (!task || !result_json) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    abpr::harness::RunConfig config =
        abpr::harness::config_from_json(config_json ? config_json : "{}");
    auto transport = abpr::harness::make_transport(config);
    auto factory =
        abpr::harness::make_refiner_factory(config, task->value.task_id, transport);
    auto result = abpr::harness::solve_task(task->value, config, factory);
    *result_json = dup_string(abpr::harness::task_result_json(result));
    return ABPR_OK;
  });
}

abpr_status abpr_run_dir(const char* tasks_dir, const char* config_json, const char* out_dir,
                         char** summary_json) {
  if (!tasks_dir || !out_dir) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    abpr::harness::RunConfig config =
        abpr::harness::config_from_json(config_json ? config_json : "{}");
    config.out_dir = out_dir;
    auto suite = abpr::harness::run_directory(tasks_dir, config);
    abpr::harness::write_results(suite, config, out_dir);
    json j;
    j["tasks"] = suite.tasks.size();
    j["scored"] = suite.scored;
    j["solved"] = suite.solved;
    j["rate_percent"] =
        suite.scored == 0 ? 0.0 : 100.0 * static_cast<double>(suite.solved) / suite.scored;
    j["out_dir"] = out_dir;
    if (summary_json) *summary_json = dup_string(j.dump());
    return ABPR_OK;
  });
}

abpr_status abpr_report(const char* results_jsonl_path, char** summary_json) {
  if (!results_jsonl_path || !summary_json) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    auto rs = abpr::harness::report_from_file(results_jsonl_path);
    json j;
    j["solved"] = rs.solved;
    j["total"] = rs.total;
    j["rational"] = rs.rational;
    j["percent"] = rs.percent;
    j["text"] = rs.text;
    *summary_json = dup_string(j.dump());
    return ABPR_OK;
  });
}

abpr_status abpr_interactive_debug(const abpr_program* program, const abpr_task* task,
                                   const char* config_json, int* buggy_count) {
  if (!program || !task) {
    g_last_error = "null argument";
    return ABPR_E_INVALID_ARG;
  }
  return guarded([&] {
    abpr::harness::RunConfig config =
        abpr::harness::config_from_json(config_json ? config_json : "{}");
    int n = abpr::harness::interactive_oracle_session(task->value, program->value, config,
                                                      std::cin, std::cout);
    if (buggy_count) *buggy_count = n;
    return ABPR_OK;
  });
}

}  // extern "C"
