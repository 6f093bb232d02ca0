#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "abpr/refine.hpp"
#include "abpr/task.hpp"

namespace abpr::ens {

using RefinerFactory =
    std::function<std::unique_ptr<refine::Refiner>(unsigned long long seed)>;

struct RunSlot {
  unsigned long long seed = 0;
  std::optional<refine::RunResult> result;  // absent when the instance failed
  std::string error;
};

struct EnsembleResult {
  std::vector<RunSlot> runs;  // instance order, seeds base_seed + i
};

/// N independent runs with seeds base_seed + i, executed concurrently and
/// collected in instance order. Individual failures become absent candidates;
/// throws Error(EnsembleFailure) only when every instance fails.
EnsembleResult run_ensemble(const harness::TaskRecord& task, const RefinerFactory& factory,
                            const harness::RunConfig& config);

struct Candidate {
  size_t run_index = 0;
  const refine::Hypothesis* hypothesis = nullptr;
};

/// Tuple of predicted test outputs; `bottom` marks any execution failure.
struct Signature {
  std::string digest;
  bool bottom = false;
};

Signature signature_of(const refine::Hypothesis& hyp, const harness::TaskRecord& task,
                       const logic::ResourceLimits& limits);

struct CandidateGroup {
  std::string signature_digest;
  bool bottom = false;
  std::vector<size_t> members;  // run indices, ascending
  long long best_coverage = 0;
  size_t representative = 0;  // run index: highest coverage, earliest run
  size_t consensus_size() const { return members.size(); }
};

struct VoteResult {
  std::vector<CandidateGroup> groups;  // ranked best first
  std::vector<size_t> selected;        // run indices of up to 2 representatives
};

/// Groups candidates by test-output signature and ranks groups by
/// (best training coverage desc, consensus size desc, earliest member asc);
/// bottom-signature groups rank after every executing group.
VoteResult vote_top2(const std::vector<Candidate>& candidates, const harness::TaskRecord& task,
                     const logic::ResourceLimits& limits);

/// Alternative ranking: consensus size before coverage.
VoteResult vote_top2_consensus_first(const std::vector<Candidate>& candidates,
                                     const harness::TaskRecord& task,
                                     const logic::ResourceLimits& limits);

/// True iff at least one selected hypothesis reproduces every expected test
/// output exactly.
bool pass_at_2(const std::vector<const refine::Hypothesis*>& selected,
               const harness::TaskRecord& task, const logic::ResourceLimits& limits);

}  // namespace abpr::ens
