#include "abpr/refine.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>
#include <thread>

#include "abpr/parser.hpp"
#include "abpr/util.hpp"

namespace abpr::refine {

using harness::RunConfig;
using harness::TaskRecord;
using logic::Program;
using logic::Solver;
using logic::TermPtr;

const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Correct: return "correct";
    case OutcomeKind::WrongOutput: return "wrong_output";
    case OutcomeKind::Failed: return "failed";
    case OutcomeKind::Error: return "error";
  }
  return "error";
}

// Retention order: coverage desc, clean parses before parse errors,
// then recency. Coverage ties go to the later hypothesis.
static bool retain_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.coverage != b.coverage) return a.coverage > b.coverage;
  if (a.parse_ok() != b.parse_ok()) return a.parse_ok();
  return a.timestamp > b.timestamp;
}

void HistoryBuffer::offer(Hypothesis h) {
  entries_.push_back(std::move(h));
  std::stable_sort(entries_.begin(), entries_.end(), retain_before);
  if (entries_.size() > capacity_) entries_.resize(capacity_);
}

const Hypothesis& HistoryBuffer::latest() const {
  if (entries_.empty()) throw Error(ErrorKind::EmptyBuffer, "history buffer is empty");
  const Hypothesis* best = &entries_[0];
  for (const auto& e : entries_)
    if (e.timestamp > best->timestamp) best = &e;
  return *best;
}

const Hypothesis& HistoryBuffer::best() const {
  if (entries_.empty()) throw Error(ErrorKind::EmptyBuffer, "history buffer is empty");
  return entries_[0];
}

const Hypothesis& select_base(const HistoryBuffer& buffer) { return buffer.latest(); }

std::vector<PairOutcome> consistency_check(const Program& program,
                                           const std::vector<TaskRecord::Pair>& pairs,
                                           const logic::ResourceLimits& limits) {
  std::vector<PairOutcome> out;
  out.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    PairOutcome po;
    po.pair_index = i;
    TermPtr out_var = logic::mk_var("Output", program.var_counter);
    TermPtr goal =
        logic::mk_compound("solve", {bk::grid_to_term(pairs[i].input), out_var});
    try {
      Solver solver(program, limits);
      bool solved = false;
      TermPtr produced;
      solver.solve(goal, [&](Solver& s) {
        solved = true;
        produced = s.store().resolve(out_var);
        return true;
      });
      if (!solved) {
        po.kind = OutcomeKind::Failed;
      } else if (logic::structurally_equal(produced, bk::grid_to_term(pairs[i].output))) {
        po.kind = OutcomeKind::Correct;
      } else if (auto g = bk::grid_from_term(produced)) {
        po.kind = OutcomeKind::WrongOutput;
        po.actual = std::move(*g);
      } else {
        po.kind = OutcomeKind::Error;
        po.error_kind = "invalid_output";
      }
    } catch (const Error& e) {
      po.kind = OutcomeKind::Error;
      po.error_kind = error_kind_name(e.kind());
    }
    out.push_back(std::move(po));
  }
  return out;
}

long long coverage_of(const std::vector<PairOutcome>& outcomes) {
  long long n = 0;
  for (const auto& o : outcomes)
    if (o.kind == OutcomeKind::Correct) ++n;
  return n;
}

std::string render_failure_detail(const TaskRecord& task, const Hypothesis& hyp,
                                  const RunConfig& config) {
  std::ostringstream os;
  if (!hyp.parse_ok()) {
    os << "The previous source failed to parse: " << hyp.parse_error << "\n";
    return os.str();
  }
  size_t budget = config.render.max_nodes;
  for (const auto& o : hyp.outcomes) {
    if (o.kind == OutcomeKind::Correct) continue;
    const auto& pair = task.train[o.pair_index];
    os << "=== Training pair " << o.pair_index + 1 << ": " << outcome_name(o.kind);
    if (o.kind == OutcomeKind::Error) os << " (" << o.error_kind << ")";
    os << " ===\n";
    if (o.kind == OutcomeKind::WrongOutput && o.actual) {
      os << bk::render_diff(pair.input, pair.output, *o.actual);
    } else {
      os << "INPUT:\n" << bk::render_grid(pair.input);
      os << "EXPECTED:\n" << bk::render_grid(pair.output);
      if (o.kind == OutcomeKind::Failed) os << "ACTUAL: solve/2 found no solution\n";
      if (o.kind == OutcomeKind::Error) os << "ACTUAL: execution error (" << o.error_kind << ")\n";
    }
    if (budget == 0) {
      os << "(trace budget exhausted)\n";
      continue;
    }
    TermPtr out_var = logic::mk_var("Output", hyp.program->var_counter);
    TermPtr goal =
        logic::mk_compound("solve", {bk::grid_to_term(pair.input), out_var});
    try {
      trace::TracedSolve traced = trace::solve_traced(*hyp.program, goal, config.limits);
      trace::TraceRenderOptions opts = config.render;
      opts.max_nodes = budget;
      if (traced.tree) {
        os << "PROOF TREE - the successful execution path:\n";
        os << trace::render_trace(*traced.tree, opts);
        budget -= std::min(budget, traced.tree->node_count());
      } else if (traced.failure) {
        os << "FAILURE WITNESS - deepest failing goal:\n";
        os << trace::render_trace(*traced.failure, opts);
        budget -= std::min(budget, traced.failure->node_count());
      }
    } catch (const trace::TraceExhausted& e) {
      os << "PROOF TREE unavailable: resource limit (" << e.resource_name() << ") hit\n";
    } catch (const Error& e) {
      os << "PROOF TREE unavailable: " << e.what() << "\n";
    }
  }
  return os.str();
}

namespace {

Hypothesis evaluate_source(const std::string& source, const TaskRecord& task,
                           const RunConfig& config, long long timestamp) {
  Hypothesis h;
  h.source_text = source;
  h.timestamp = timestamp;
  try {
    auto prog = std::make_shared<Program>(logic::parse_program(source));
    h.program = std::move(prog);
  } catch (const Error& e) {
    h.parse_error = e.what();
    return h;  // coverage 0, outcome error(parse) via record
  }
  h.outcomes = consistency_check(*h.program, task.train, config.limits);
  h.coverage = coverage_of(h.outcomes);
  return h;
}

std::string outcome_label(const Hypothesis& h, size_t pair_count) {
  if (!h.parse_ok()) return "parse_error";
  if (h.coverage == static_cast<long long>(pair_count)) return "consistent";
  return h.coverage > 0 ? "partial" : "failed";
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Retries transport failures with exponential backoff.
template <typename F>
std::string with_retries(F&& call, const RunConfig& config) {
  int failures = 0;
  long long backoff = config.refiner_backoff_ms;
  while (true) {
    try {
      return call();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Transport) throw;
      if (++failures >= config.max_refiner_retries)
        throw Error(ErrorKind::RefinerFailure,
                    std::string("refiner transport failed ") + std::to_string(failures) +
                        " consecutive times: " + e.what());
      if (backoff > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        backoff *= 2;
      }
    }
  }
}

}  // namespace

std::string iteration_record_json(const IterationRecord& r) {
  std::ostringstream os;
  os << "{\"run_seed\":" << r.run_seed << ",\"t\":" << r.t << ",\"coverage\":" << r.coverage
     << ",\"outcome\":\"" << r.outcome << "\",\"source_digest\":\"" << r.source_digest
     << "\",\"prompt_digest\":\"" << r.prompt_digest << "\",\"response_digest\":\""
     << r.response_digest << "\",\"elapsed_ms\":" << r.elapsed_ms << "}";
  return os.str();
}

RunResult abpr_run(const TaskRecord& task, Refiner& refiner, const RunConfig& config,
                   unsigned long long seed, apd::NodeOracle* oracle) {
  if (config.t_max < 1 || config.k < 1)
    throw Error(ErrorKind::Config, "t_max and k must be at least 1");
  if (task.train.empty()) throw Error(ErrorKind::Config, "task has no training pairs");

  RunResult result;
  result.seed = seed;
  HistoryBuffer buffer(static_cast<size_t>(config.k));
  std::optional<Hypothesis> last_offered;

  auto log_entry = [&](const Hypothesis& h, long long t, long long started,
                       const std::string& prompt_digest, const std::string& response) {
    IterationRecord rec;
    rec.run_seed = seed;
    rec.t = t;
    rec.coverage = h.coverage;
    rec.outcome = outcome_label(h, task.train.size());
    rec.source_digest = digest_hex(h.source_text);
    rec.prompt_digest = prompt_digest;
    rec.response_digest = digest_hex(response);
    rec.elapsed_ms = now_ms() - started;
    result.log.push_back(rec);
  };

  // Initialization: retry unparseable first generations, then give up.
  long long started = now_ms();
  Hypothesis h0;
  {
    int attempts = 0;
    while (true) {
      std::string source =
          with_retries([&] { return refiner.initial(task, seed); }, config);
      h0 = evaluate_source(source, task, config, 0);
      if (h0.parse_ok()) break;
      if (++attempts >= config.max_refiner_retries)
        throw Error(ErrorKind::InitializationFailure,
                    "initial hypothesis failed to parse after " + std::to_string(attempts) +
                        " attempts: " + h0.parse_error);
    }
  }
  log_entry(h0, 0, started, digest_hex(task.task_id + ":" + std::to_string(seed)),
            h0.source_text);
  if (h0.coverage == static_cast<long long>(task.train.size())) {
    result.final = std::move(h0);
    result.consistent = true;
    return result;
  }
  last_offered = h0;
  buffer.offer(h0);

  for (long long t = 1; t <= config.t_max; ++t) {
    started = now_ms();
    const Hypothesis& base = config.base_selection == RunConfig::BaseSelection::Latest
                                 ? buffer.latest()
                                 : buffer.best();

    RefineContext ctx;
    ctx.task = &task;
    ctx.base = &base;
    ctx.iteration = t;
    ctx.max_iterations = config.t_max;
    ctx.seed = seed;
    ctx.trace_detail = render_failure_detail(task, base, config);
    ctx.attempts_history = [&] {
      std::ostringstream os;
      // The buffer's k entries plus the immediately preceding attempt, oldest first.
      std::vector<const Hypothesis*> shown;
      for (const auto& e : buffer.entries()) shown.push_back(&e);
      if (last_offered) {
        bool present = false;
        for (const Hypothesis* h : shown)
          if (h->timestamp == last_offered->timestamp) present = true;
        if (!present) shown.push_back(&*last_offered);
      }
      std::sort(shown.begin(), shown.end(),
                [](const Hypothesis* a, const Hypothesis* b) {
                  return a->timestamp < b->timestamp;
                });
      for (const Hypothesis* h : shown) {
        os << "--- Attempt at iteration " << h->timestamp << " (coverage " << h->coverage << "/"
           << task.train.size() << ") ---\n"
           << h->source_text << "\n";
      }
      return os.str();
    }();
    if (config.explicit_localization && oracle && base.parse_ok()) {
      for (const auto& o : base.outcomes) {
        if (o.kind != OutcomeKind::WrongOutput) continue;
        TermPtr out_var = logic::mk_var("Output", base.program->var_counter);
        TermPtr goal = logic::mk_compound(
            "solve", {bk::grid_to_term(task.train[o.pair_index].input), out_var});
        try {
          auto traced = trace::solve_traced(*base.program, goal, config.limits);
          if (traced.tree) {
            auto located = apd::locate_buggy_nodes(*traced.tree, *oracle,
                                                   config.localization_budget);
            ctx.buggy_nodes = apd::serialize_buggy_nodes(located, *base.program);
          }
        } catch (const Error&) {
          // Localization is best-effort; the fix prompt still carries traces.
        }
        break;  // first wrong-output pair only
      }
    }

    std::string prompt_digest = digest_hex(ctx.trace_detail + "|" + ctx.attempts_history + "|" +
                                           ctx.buggy_nodes + "|" + std::to_string(t));
    std::string response = with_retries([&] { return refiner.refine(ctx); }, config);
    Hypothesis h = evaluate_source(response, task, config, t);
    log_entry(h, t, started, prompt_digest, response);

    if (h.parse_ok() && h.coverage == static_cast<long long>(task.train.size())) {
      result.final = std::move(h);
      result.consistent = true;
      return result;
    }
    last_offered = h;
    buffer.offer(std::move(h));
  }

  result.final = buffer.best();
  return result;
}

}  // namespace abpr::refine
