#include "abpr/ensemble.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include "abpr/util.hpp"

namespace abpr::ens {

using harness::RunConfig;
using harness::TaskRecord;
using logic::Solver;
using logic::TermPtr;

EnsembleResult run_ensemble(const TaskRecord& task, const RefinerFactory& factory,
                            const RunConfig& config) {
  size_t n = static_cast<size_t>(std::max<long long>(1, config.n_instances));
  EnsembleResult out;
  out.runs.resize(n);
  std::vector<std::thread> threads;
  threads.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    unsigned long long seed = config.base_seed + i;
    out.runs[i].seed = seed;
    threads.emplace_back([&, i, seed] {
      try {
        auto refiner = factory(seed);
        out.runs[i].result = refine::abpr_run(task, *refiner, config, seed);
      } catch (const std::exception& e) {
        out.runs[i].error = e.what();
      }
    });
  }
  for (auto& t : threads) t.join();
  bool any_ok = std::any_of(out.runs.begin(), out.runs.end(),
                            [](const RunSlot& s) { return s.result.has_value(); });
  if (!any_ok)
    throw Error(ErrorKind::EnsembleFailure,
                "all " + std::to_string(n) + " ensemble instances failed");
  return out;
}

/// Executes the hypothesis on one input; nullopt on failure of any kind.
static std::optional<bk::Grid> predict(const refine::Hypothesis& hyp, const bk::Grid& input,
                                       const logic::ResourceLimits& limits) {
  if (!hyp.parse_ok()) return std::nullopt;
  TermPtr out_var = logic::mk_var("Output", hyp.program->var_counter);
  TermPtr goal = logic::mk_compound("solve", {bk::grid_to_term(input), out_var});
  try {
    Solver solver(*hyp.program, limits);
    std::optional<bk::Grid> produced;
    solver.solve(goal, [&](Solver& s) {
      produced = bk::grid_from_term(s.store().resolve(out_var));
      return true;
    });
    return produced;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Signature signature_of(const refine::Hypothesis& hyp, const TaskRecord& task,
                       const logic::ResourceLimits& limits) {
  Signature sig;
  std::string acc;
  for (const auto& t : task.test) {
    auto g = predict(hyp, t.input, limits);
    if (g) {
      acc += bk::render_grid(*g);
    } else {
      acc += "\xE2\x8A\xA5";  // bottom
      sig.bottom = true;
    }
    acc += '\x1e';
  }
  sig.digest = digest_hex(acc);
  return sig;
}

static VoteResult vote_impl(const std::vector<Candidate>& candidates, const TaskRecord& task,
                            const logic::ResourceLimits& limits, bool coverage_first) {
  VoteResult out;
  std::map<std::string, CandidateGroup> by_sig;
  std::map<std::string, std::vector<const refine::Hypothesis*>> members_of;
  std::vector<std::string> order;  // first-seen order for stable grouping

  for (const auto& c : candidates) {
    Signature sig = signature_of(*c.hypothesis, task, limits);
    auto it = by_sig.find(sig.digest);
    if (it == by_sig.end()) {
      CandidateGroup g;
      g.signature_digest = sig.digest;
      g.bottom = sig.bottom;
      it = by_sig.emplace(sig.digest, std::move(g)).first;
      order.push_back(sig.digest);
    }
    it->second.members.push_back(c.run_index);
    members_of[sig.digest].push_back(c.hypothesis);
  }

  for (const std::string& key : order) {
    CandidateGroup& g = by_sig[key];
    const auto& hyps = members_of[key];
    // Representative: highest coverage, earliest run index on ties.
    size_t best_i = 0;
    for (size_t i = 1; i < hyps.size(); ++i)
      if (hyps[i]->coverage > hyps[best_i]->coverage) best_i = i;
    g.best_coverage = hyps[best_i]->coverage;
    g.representative = g.members[best_i];
    out.groups.push_back(g);
  }

  std::stable_sort(out.groups.begin(), out.groups.end(),
                   [&](const CandidateGroup& a, const CandidateGroup& b) {
                     if (a.bottom != b.bottom) return !a.bottom;
                     if (coverage_first) {
                       if (a.best_coverage != b.best_coverage)
                         return a.best_coverage > b.best_coverage;
                       if (a.members.size() != b.members.size())
                         return a.members.size() > b.members.size();
                     } else {
                       if (a.members.size() != b.members.size())
                         return a.members.size() > b.members.size();
                       if (a.best_coverage != b.best_coverage)
                         return a.best_coverage > b.best_coverage;
                     }
                     return a.members.front() < b.members.front();
                   });

  for (size_t i = 0; i < out.groups.size() && out.selected.size() < 2; ++i)
    out.selected.push_back(out.groups[i].representative);
  return out;
}

VoteResult vote_top2(const std::vector<Candidate>& candidates, const TaskRecord& task,
                     const logic::ResourceLimits& limits) {
  return vote_impl(candidates, task, limits, true);
}

VoteResult vote_top2_consensus_first(const std::vector<Candidate>& candidates,
                                     const TaskRecord& task,
                                     const logic::ResourceLimits& limits) {
  return vote_impl(candidates, task, limits, false);
}

bool pass_at_2(const std::vector<const refine::Hypothesis*>& selected, const TaskRecord& task,
               const logic::ResourceLimits& limits) {
  for (const auto* hyp : selected) {
    if (!hyp) continue;
    bool all = !task.test.empty();
    for (const auto& t : task.test) {
      if (!t.expected) {
        all = false;
        break;
      }
      auto g = predict(*hyp, t.input, limits);
      if (!g || !(*g == *t.expected)) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace abpr::ens
