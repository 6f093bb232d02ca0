#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abpr/apd.hpp"
#include "abpr/task.hpp"

namespace abpr::refine {

enum class OutcomeKind { Correct, WrongOutput, Failed, Error };

struct PairOutcome {
  size_t pair_index = 0;
  OutcomeKind kind = OutcomeKind::Failed;
  std::optional<bk::Grid> actual;  // WrongOutput carries the produced grid
  std::string error_kind;          // Error carries the engine error kind
};

const char* outcome_name(OutcomeKind k);

/// A timestamped candidate program with its training outcomes.
struct Hypothesis {
  std::shared_ptr<const logic::Program> program;  // null when the source failed to parse
  std::string source_text;
  std::string parse_error;
  long long timestamp = 0;
  long long coverage = 0;
  std::vector<PairOutcome> outcomes;

  bool parse_ok() const { return program != nullptr; }
};

/// Capacity-k store of the best hypotheses by (coverage desc, parse-ok,
/// timestamp desc) among all hypotheses ever offered.
class HistoryBuffer {
public:
  explicit HistoryBuffer(size_t capacity) : capacity_(capacity) {}
  void offer(Hypothesis h);
  const Hypothesis& latest() const;  // greatest timestamp; throws EmptyBuffer
  const Hypothesis& best() const;    // best by the retention order
  const std::vector<Hypothesis>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

private:
  size_t capacity_;
  std::vector<Hypothesis> entries_;  // kept in retention order, best first
};

const Hypothesis& select_base(const HistoryBuffer& buffer);

/// Executes solve/2 on every training pair and classifies the results.
std::vector<PairOutcome> consistency_check(const logic::Program& program,
                                           const std::vector<harness::TaskRecord::Pair>& pairs,
                                           const logic::ResourceLimits& limits);
long long coverage_of(const std::vector<PairOutcome>& outcomes);

/// Everything a refiner sees when sampling a successor hypothesis.
struct RefineContext {
  const harness::TaskRecord* task = nullptr;
  const Hypothesis* base = nullptr;
  std::string trace_detail;      // rendered traces and diffs per failing pair
  std::string attempts_history;  // prior hypotheses' source + outcome summaries
  long long iteration = 1;       // t, in [1, t_max]
  long long max_iterations = 10;
  std::string buggy_nodes;  // serialized candidate set when localization is explicit
  unsigned long long seed = 0;
};

/// Successor-hypothesis sampler. Total: may return the base source unchanged
/// on internal failure. Must tolerate concurrent invocation from distinct runs.
class Refiner {
public:
  virtual ~Refiner() = default;
  virtual std::string initial(const harness::TaskRecord& task, unsigned long long seed) = 0;
  virtual std::string refine(const RefineContext& ctx) = 0;
};

/// Deterministic refiner fed from a fixed list of sources; the workhorse of
/// the test harness.
class ScriptedRefiner : public Refiner {
public:
  ScriptedRefiner(std::string initial_source, std::vector<std::string> refinements)
      : initial_(std::move(initial_source)), refinements_(std::move(refinements)) {}
  std::string initial(const harness::TaskRecord&, unsigned long long) override {
    return initial_;
  }
  std::string refine(const RefineContext&) override {
    if (next_ < refinements_.size()) return refinements_[next_++];
    return refinements_.empty() ? initial_ : refinements_.back();
  }

private:
  std::string initial_;
  std::vector<std::string> refinements_;
  size_t next_ = 0;
};

/// Refiner whose transport always fails; exercises fault isolation.
class FailingRefiner : public Refiner {
public:
  std::string initial(const harness::TaskRecord&, unsigned long long) override {
    throw Error(ErrorKind::Transport, "refiner transport unavailable");
  }
  std::string refine(const RefineContext&) override {
    throw Error(ErrorKind::Transport, "refiner transport unavailable");
  }
};

struct IterationRecord {
  unsigned long long run_seed = 0;
  long long t = 0;
  long long coverage = 0;
  std::string outcome;  // consistent | partial | failed | parse_error | error
  std::string source_digest;
  std::string prompt_digest;
  std::string response_digest;
  long long elapsed_ms = 0;
};

std::string iteration_record_json(const IterationRecord& r);

struct RunResult {
  Hypothesis final;
  std::vector<IterationRecord> log;  // entry at t=0 is the initialization
  bool consistent = false;           // returned via the early-consistency exit
  unsigned long long seed = 0;
};

/// One full iterative-debugging run: initialize, then refine up to t_max
/// times, maintaining the capacity-k history buffer; returns the consistent
/// hypothesis as soon as one appears, else the best-coverage entry.
RunResult abpr_run(const harness::TaskRecord& task, Refiner& refiner,
                   const harness::RunConfig& config, unsigned long long seed,
                   apd::NodeOracle* oracle = nullptr);

/// trace_detail builder: per failing pair, grid comparison plus the rendered
/// proof tree (or the failure witness), under a shared node budget.
std::string render_failure_detail(const harness::TaskRecord& task, const Hypothesis& hyp,
                                  const harness::RunConfig& config);

}  // namespace abpr::refine
