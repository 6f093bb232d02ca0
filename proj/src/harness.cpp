#include "abpr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "abpr/apd.hpp"
#include "abpr/util.hpp"
#include "json.hpp"

namespace abpr::harness {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Task I/O
// ---------------------------------------------------------------------------

static bk::Grid grid_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::Format, "grid must be a non-empty array");
  std::vector<std::vector<int>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(ErrorKind::Format, "grid row must be an array");
    std::vector<int> r;
    for (const auto& cell : row) {
      if (!cell.is_number_integer()) throw Error(ErrorKind::Format, "grid cell must be an integer");
      r.push_back(cell.get<int>());
    }
    rows.push_back(std::move(r));
  }
  bk::Grid g = bk::Grid::from_rows(rows);
  g.validate();
  return g;
}

static json grid_to_json(const bk::Grid& g) {
  json rows = json::array();
  for (const auto& row : g.to_rows()) rows.push_back(row);
  return rows;
}

LoadedTask parse_task(const std::string& json_text, const std::string& task_id) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Format, task_id + ": not valid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("train") || !j.contains("test"))
    throw Error(ErrorKind::Format, task_id + ": expected {\"train\": [...], \"test\": [...]}");

  LoadedTask out;
  out.task.task_id = task_id;
  for (const auto& p : j["train"]) {
    if (!p.contains("input") || !p.contains("output"))
      throw Error(ErrorKind::Format, task_id + ": train pair needs input and output");
    out.task.train.push_back({grid_from_json(p["input"]), grid_from_json(p["output"])});
  }
  for (const auto& p : j["test"]) {
    if (!p.contains("input"))
      throw Error(ErrorKind::Format, task_id + ": test pair needs an input");
    TaskRecord::TestPair tp;
    tp.input = grid_from_json(p["input"]);
    if (p.contains("output") && !p["output"].is_null()) tp.expected = grid_from_json(p["output"]);
    out.task.test.push_back(std::move(tp));
  }
  if (out.task.train.size() < 2 || out.task.train.size() > 5)
    out.warnings.push_back(task_id + ": " + std::to_string(out.task.train.size()) +
                           " training pairs (expected 2-5)");
  if (out.task.test.size() < 1 || out.task.test.size() > 3)
    out.warnings.push_back(task_id + ": " + std::to_string(out.task.test.size()) +
                           " test pairs (expected 1-3)");
  return out;
}

LoadedTask load_task(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot open task file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_task(ss.str(), fs::path(path).stem().string());
}

std::string serialize_task(const TaskRecord& task) {
  json j;
  j["train"] = json::array();
  for (const auto& p : task.train)
    j["train"].push_back({{"input", grid_to_json(p.input)}, {"output", grid_to_json(p.output)}});
  j["test"] = json::array();
  for (const auto& p : task.test) {
    json tp = {{"input", grid_to_json(p.input)}};
    if (p.expected) tp["output"] = grid_to_json(*p.expected);
    j["test"].push_back(tp);
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

RunConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("t_max", c.t_max);
  get("k", c.k);
  get("n_instances", c.n_instances);
  get("provider", c.provider);
  get("model", c.model);
  get("temperature", c.temperature);
  get("provider_options", c.provider_options);
  get("base_seed", c.base_seed);
  get("prompt_budget", c.prompt_budget);
  get("max_refiner_retries", c.max_refiner_retries);
  get("refiner_backoff_ms", c.refiner_backoff_ms);
  get("mock_script", c.mock_script_path);
  get("out_dir", c.out_dir);
  get("explicit_localization", c.explicit_localization);
  if (j.contains("max_steps")) c.limits.max_steps = j["max_steps"].get<long long>();
  if (j.contains("max_depth")) c.limits.max_depth = j["max_depth"].get<long long>();
  if (j.contains("timeout_ms")) c.limits.timeout_ms = j["timeout_ms"].get<long long>();
  if (j.contains("mode")) {
    std::string m = j["mode"].get<std::string>();
    if (m == "live") c.mode = RunConfig::Mode::Live;
    else if (m == "mock") c.mode = RunConfig::Mode::Mock;
    else if (m == "interactive") c.mode = RunConfig::Mode::InteractiveOracle;
    else throw Error(ErrorKind::Config, "unknown mode: " + m);
  }
  if (j.contains("base_selection")) {
    std::string b = j["base_selection"].get<std::string>();
    if (b == "latest") c.base_selection = RunConfig::BaseSelection::Latest;
    else if (b == "best") c.base_selection = RunConfig::BaseSelection::Best;
    else throw Error(ErrorKind::Config, "unknown base_selection: " + b);
  }
  if (c.t_max < 1 || c.k < 1 || c.n_instances < 1)
    throw Error(ErrorKind::Config, "t_max, k, and n_instances must be at least 1");
  return c;
}

std::string config_to_json(const RunConfig& c) {
  json j;
  j["t_max"] = c.t_max;
  j["k"] = c.k;
  j["n_instances"] = c.n_instances;
  j["provider"] = c.provider;
  j["model"] = c.model;
  j["temperature"] = c.temperature;
  j["provider_options"] = c.provider_options;
  j["base_seed"] = c.base_seed;
  j["prompt_budget"] = c.prompt_budget;
  j["max_refiner_retries"] = c.max_refiner_retries;
  j["refiner_backoff_ms"] = c.refiner_backoff_ms;
  j["mock_script"] = c.mock_script_path;
  j["out_dir"] = c.out_dir;
  j["explicit_localization"] = c.explicit_localization;
  j["max_steps"] = c.limits.max_steps;
  j["max_depth"] = c.limits.max_depth;
  j["timeout_ms"] = c.limits.timeout_ms;
  j["mode"] = c.mode == RunConfig::Mode::Live      ? "live"
              : c.mode == RunConfig::Mode::Mock    ? "mock"
                                                   : "interactive";
  j["base_selection"] =
      c.base_selection == RunConfig::BaseSelection::Latest ? "latest" : "best";
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

std::shared_ptr<llm::Transport> make_transport(const RunConfig& config) {
  if (config.mode == RunConfig::Mode::Mock) {
    if (config.mock_script_path.empty())
      throw Error(ErrorKind::Config, "mock mode needs --mock-script");
    return std::make_shared<llm::MockTransport>(
        llm::MockTransport::from_file(config.mock_script_path));
  }
  return std::make_shared<llm::HttpTransport>();
}

ens::RefinerFactory make_refiner_factory(const RunConfig& config, const std::string& task_id,
                                         std::shared_ptr<llm::Transport> transport) {
  return [&config, task_id, transport](unsigned long long) {
    return std::make_unique<llm::LlmRefiner>(*transport, config, task_id);
  };
}

TaskResult solve_task(const TaskRecord& task, const RunConfig& config,
                      const ens::RefinerFactory& factory) {
  auto t0 = std::chrono::steady_clock::now();
  TaskResult r;
  r.task_id = task.task_id;

  ens::EnsembleResult ensemble = ens::run_ensemble(task, factory, config);
  std::vector<ens::Candidate> candidates;
  std::vector<const refine::Hypothesis*> by_run(ensemble.runs.size(), nullptr);
  for (size_t i = 0; i < ensemble.runs.size(); ++i) {
    const auto& slot = ensemble.runs[i];
    r.seeds.push_back(slot.seed);
    TaskResult::PerRun pr;
    pr.seed = slot.seed;
    if (slot.result) {
      pr.ok = true;
      pr.coverage = slot.result->final.coverage;
      pr.timestamp = slot.result->final.timestamp;
      pr.consistent = slot.result->consistent;
      pr.source_digest = digest_hex(slot.result->final.source_text);
      pr.log = slot.result->log;
      by_run[i] = &slot.result->final;
      candidates.push_back({i, &slot.result->final});
    } else {
      pr.error = slot.error;
    }
    r.runs.push_back(std::move(pr));
  }

  r.vote = ens::vote_top2(candidates, task, config.limits);
  std::vector<const refine::Hypothesis*> selected;
  for (size_t idx : r.vote.selected) {
    selected.push_back(by_run[idx]);
    r.selected_digests.push_back(digest_hex(by_run[idx]->source_text));
    r.selected_sources.push_back(by_run[idx]->source_text);
  }

  if (task.has_all_expected()) {
    r.pass2 = ens::pass_at_2(selected, task, config.limits);
    if (*r.pass2) {
      // Earliest iteration whose selected program wins on its own.
      for (const auto* hyp : selected) {
        if (!ens::pass_at_2({hyp}, task, config.limits)) continue;
        if (r.solve_iteration < 0 || hyp->timestamp < r.solve_iteration)
          r.solve_iteration = hyp->timestamp;
      }
    }
  } else {
    // Hidden-eval mode: emit predictions only.
    for (const auto* hyp : selected) {
      std::vector<std::string> per_test;
      for (const auto& t : task.test) {
        logic::TermPtr out_var = logic::mk_var("Output", hyp->program ? hyp->program->var_counter : 0);
        std::string rendered = "(no prediction)";
        if (hyp->parse_ok()) {
          logic::TermPtr goal =
              logic::mk_compound("solve", {bk::grid_to_term(t.input), out_var});
          try {
            logic::Solver solver(*hyp->program, config.limits);
            solver.solve(goal, [&](logic::Solver& s) {
              if (auto g = bk::grid_from_term(s.store().resolve(out_var)))
                rendered = bk::render_grid(*g);
              return true;
            });
          } catch (const Error&) {
          }
        }
        per_test.push_back(rendered);
      }
      r.predictions.push_back(std::move(per_test));
    }
  }

  r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return r;
}

SuiteResult run_suite(const std::vector<TaskRecord>& tasks, const RunConfig& config) {
  SuiteResult suite;
  std::shared_ptr<llm::Transport> transport;
  if (config.mode != RunConfig::Mode::InteractiveOracle) transport = make_transport(config);
  for (const auto& task : tasks) {
    auto factory = make_refiner_factory(config, task.task_id, transport);
    suite.tasks.push_back(solve_task(task, config, factory));
  }
  for (const auto& t : suite.tasks) {
    if (!t.pass2.has_value()) continue;
    ++suite.scored;
    if (*t.pass2) ++suite.solved;
  }
  suite.curve.assign(static_cast<size_t>(config.t_max) + 1, 0);
  for (const auto& t : suite.tasks) {
    if (!t.pass2.has_value() || !*t.pass2 || t.solve_iteration < 0) continue;
    for (long long i = t.solve_iteration; i <= config.t_max; ++i)
      ++suite.curve[static_cast<size_t>(i)];
  }
  return suite;
}

SuiteResult run_directory(const std::string& tasks_dir, const RunConfig& config) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(tasks_dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorKind::Io, "no .json task files in " + tasks_dir);
  std::vector<TaskRecord> tasks;
  for (const auto& f : files) {
    LoadedTask lt = load_task(f);
    for (const auto& w : lt.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    tasks.push_back(std::move(lt.task));
  }
  return run_suite(tasks, config);
}

// ---------------------------------------------------------------------------
// Persistence and reporting
// ---------------------------------------------------------------------------

std::string task_result_json(const TaskResult& r) {
  json j;
  j["task_id"] = r.task_id;
  j["seeds"] = r.seeds;
  json runs = json::array();
  for (const auto& pr : r.runs) {
    json rj = {{"seed", pr.seed},       {"ok", pr.ok},
               {"coverage", pr.coverage}, {"timestamp", pr.timestamp},
               {"consistent", pr.consistent}, {"source_digest", pr.source_digest}};
    if (!pr.error.empty()) rj["error"] = pr.error;
    runs.push_back(rj);
  }
  j["runs"] = runs;
  json groups = json::array();
  for (const auto& g : r.vote.groups)
    groups.push_back({{"signature", g.signature_digest},
                      {"bottom", g.bottom},
                      {"members", g.members},
                      {"best_coverage", g.best_coverage},
                      {"representative", g.representative}});
  j["groups"] = groups;
  j["selected"] = r.selected_digests;
  if (r.pass2.has_value())
    j["pass_at_2"] = *r.pass2;
  else
    j["pass_at_2"] = nullptr;
  j["solve_iteration"] = r.solve_iteration;
  j["wall_ms"] = r.wall_ms;
  if (!r.predictions.empty()) j["predictions"] = r.predictions;
  return j.dump();
}

std::string summary_csv(const SuiteResult& suite, long long t_max) {
  std::ostringstream os;
  os << "iteration,cumulative_solved,rate\n";
  long long total = suite.scored > 0 ? suite.scored : 1;
  for (long long i = 0; i <= t_max; ++i) {
    long long solved = i < static_cast<long long>(suite.curve.size())
                           ? suite.curve[static_cast<size_t>(i)]
                           : (suite.curve.empty() ? 0 : suite.curve.back());
    os << i << "," << solved << ","
       << json(static_cast<double>(solved) / static_cast<double>(total)).dump() << "\n";
  }
  return os.str();
}

void write_results(const SuiteResult& suite, const RunConfig& config,
                   const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "results.jsonl");
    for (const auto& t : suite.tasks) f << task_result_json(t) << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "runs.jsonl");
    for (const auto& t : suite.tasks)
      for (const auto& pr : t.runs)
        for (const auto& rec : pr.log)
          f << "{\"task_id\":\"" << t.task_id << "\","
            << refine::iteration_record_json(rec).substr(1) << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "summary.csv");
    f << summary_csv(suite, config.t_max);
  }
  {
    std::ofstream f(fs::path(out_dir) / "config.json");
    f << config_to_json(config) << "\n";
  }
}

ReportSummary report_from_file(const std::string& results_jsonl_path) {
  std::ifstream f(results_jsonl_path);
  if (!f) throw Error(ErrorKind::Io, "cannot open results file: " + results_jsonl_path);
  ReportSummary rs;
  std::ostringstream text;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Format, std::string("bad results line: ") + e.what());
    }
    if (!j.contains("pass_at_2") || j["pass_at_2"].is_null()) continue;
    ++rs.total;
    bool ok = j["pass_at_2"].get<bool>();
    if (ok) ++rs.solved;
    text << j.value("task_id", "?") << ": " << (ok ? "solved" : "unsolved") << "\n";
  }
  rs.rational = std::to_string(rs.solved) + "/" + std::to_string(rs.total);
  rs.percent = rs.total == 0 ? 0.0 : 100.0 * static_cast<double>(rs.solved) /
                                         static_cast<double>(rs.total);
  char buf[64];
  std::snprintf(buf, sizeof buf, "Pass@2: %lld/%lld (%.2f%%)", rs.solved, rs.total, rs.percent);
  text << buf << "\n";
  rs.text = text.str();
  return rs;
}

// ---------------------------------------------------------------------------
// Interactive oracle
// ---------------------------------------------------------------------------

namespace {

class HumanOracle : public apd::NodeOracle {
public:
  HumanOracle(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  apd::Verdict query(const logic::TermPtr& goal, const std::string&) override {
    out_ << "Is this goal valid in the intended interpretation?\n  "
         << logic::render_term(goal) << "\n  [y]es / [n]o / [u]nknown: ";
    out_.flush();
    std::string line;
    while (std::getline(in_, line)) {
      if (line.empty()) continue;
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(line[0])));
      if (c == 'y') return apd::Verdict::Valid;
      if (c == 'n') return apd::Verdict::Invalid;
      if (c == 'u') return apd::Verdict::Unknown;
      out_ << "  please answer y, n, or u: ";
      out_.flush();
    }
    throw Error(ErrorKind::SessionAborted, "oracle session ended at EOF");
  }

private:
  std::istream& in_;
  std::ostream& out_;
};

}  // namespace

int interactive_oracle_session(const TaskRecord& task, const logic::Program& program,
                               const RunConfig& config, std::istream& in, std::ostream& out) {
  auto outcomes = refine::consistency_check(program, task.train, config.limits);
  const refine::PairOutcome* target = nullptr;
  for (const auto& o : outcomes)
    if (o.kind != refine::OutcomeKind::Correct) {
      target = &o;
      break;
    }
  if (!target) {
    out << "The program solves every training pair; nothing to debug.\n";
    return 0;
  }
  out << "Debugging training pair " << target->pair_index + 1 << " ("
      << refine::outcome_name(target->kind) << ")\n";
  if (target->kind != refine::OutcomeKind::WrongOutput) {
    logic::TermPtr out_var = logic::mk_var("Output", program.var_counter);
    logic::TermPtr goal = logic::mk_compound(
        "solve", {bk::grid_to_term(task.train[target->pair_index].input), out_var});
    auto traced = trace::solve_traced(program, goal, config.limits);
    if (traced.failure)
      out << "No successful derivation; failure witness:\n"
          << trace::render_trace(*traced.failure, config.render);
    return 0;
  }

  logic::TermPtr out_var = logic::mk_var("Output", program.var_counter);
  logic::TermPtr goal = logic::mk_compound(
      "solve", {bk::grid_to_term(task.train[target->pair_index].input), out_var});
  auto traced = trace::solve_traced(program, goal, config.limits);
  if (!traced.tree) {
    out << "No derivation tree available.\n";
    return 0;
  }
  out << "Proof tree of the wrong-output derivation:\n"
      << trace::render_trace(*traced.tree, config.render);
  HumanOracle oracle(in, out);
  if (oracle.query(traced.tree->goal, "") != apd::Verdict::Invalid) {
    out << "No buggy node under root.\n";
    return 0;
  }
  auto located = apd::locate_buggy_nodes(*traced.tree, oracle, config.localization_budget);
  if (located.nodes.empty()) {
    out << "No buggy node under root"
        << (located.truncated ? " (query budget exhausted)" : "") << ".\n";
  } else {
    out << "Buggy nodes (" << located.nodes.size() << "):\n"
        << apd::serialize_buggy_nodes(located, program);
  }
  return static_cast<int>(located.nodes.size());
}

}  // namespace abpr::harness
