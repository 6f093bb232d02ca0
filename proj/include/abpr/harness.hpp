#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abpr/ensemble.hpp"
#include "abpr/gateway.hpp"
#include "abpr/task.hpp"

namespace abpr::harness {

struct LoadedTask {
  TaskRecord task;
  std::vector<std::string> warnings;
};

/// Parses the official ARC JSON task shape. Throws Error(Format) on malformed
/// structure and Error(GridInvariant) on bad cell values.
LoadedTask load_task(const std::string& path);
LoadedTask parse_task(const std::string& json_text, const std::string& task_id);

/// Canonical serialization; load-then-serialize round-trips byte-equal.
std::string serialize_task(const TaskRecord& task);

RunConfig config_from_json(const std::string& json_text);
std::string config_to_json(const RunConfig& config);

struct TaskResult {
  std::string task_id;
  std::vector<unsigned long long> seeds;
  struct PerRun {
    unsigned long long seed = 0;
    bool ok = false;
    long long coverage = 0;
    long long timestamp = 0;
    bool consistent = false;
    std::string source_digest;
    std::string error;
    std::vector<refine::IterationRecord> log;
  };
  std::vector<PerRun> runs;
  ens::VoteResult vote;
  std::vector<std::string> selected_digests;
  std::vector<std::string> selected_sources;
  std::optional<bool> pass2;            // absent in hidden-eval mode
  long long solve_iteration = -1;       // earliest iteration producing a winning selection
  long long wall_ms = 0;
  std::vector<std::vector<std::string>> predictions;  // per selected, rendered test outputs
};

std::string task_result_json(const TaskResult& r);

std::shared_ptr<llm::Transport> make_transport(const RunConfig& config);
ens::RefinerFactory make_refiner_factory(const RunConfig& config, const std::string& task_id,
                                         std::shared_ptr<llm::Transport> transport);

/// Ensemble + top-2 voting + Pass@2 for one task.
TaskResult solve_task(const TaskRecord& task, const RunConfig& config,
                      const ens::RefinerFactory& factory);

struct SuiteResult {
  std::vector<TaskResult> tasks;
  long long solved = 0;
  long long scored = 0;  // tasks with expected outputs
  /// cumulative solved count per iteration 0..t_max
  std::vector<long long> curve;
};

SuiteResult run_suite(const std::vector<TaskRecord>& tasks, const RunConfig& config);
SuiteResult run_directory(const std::string& tasks_dir, const RunConfig& config);

/// Writes results.jsonl, runs.jsonl, summary.csv, and config.json.
void write_results(const SuiteResult& suite, const RunConfig& config,
                   const std::string& out_dir);
std::string summary_csv(const SuiteResult& suite, long long t_max);

struct ReportSummary {
  long long solved = 0;
  long long total = 0;
  std::string rational;  // "solved/total"
  double percent = 0.0;
  std::string text;      // printable report
};
ReportSummary report_from_file(const std::string& results_jsonl_path);

/// Walks bug localization over the first failing training pair with a human
/// oracle on the given streams (answers y/n/u per node). Returns the number
/// of buggy nodes reported; throws Error(SessionAborted) on EOF.
int interactive_oracle_session(const TaskRecord& task, const logic::Program& program,
                               const RunConfig& config, std::istream& in, std::ostream& out);

}  // namespace abpr::harness
