#pragma once

#include <map>
#include <string>
#include <vector>

#include "abpr/engine.hpp"
#include "abpr/trace.hpp"

namespace abpr::apd {

enum class Verdict { Valid, Invalid, Unknown };

/// Membership test against the intended interpretation, answered per ground
/// goal. Implementations may be humans, LLMs, or reference programs.
class NodeOracle {
public:
  virtual ~NodeOracle() = default;
  virtual Verdict query(const logic::TermPtr& goal_at_exit, const std::string& context) = 0;
};

struct BuggyNode {
  const trace::ComputationTree* node;
  int clause_id;
  std::vector<size_t> path;  // child indices from the root
};

struct LocateResult {
  std::vector<BuggyNode> nodes;
  bool truncated = false;  // stopped on query budget
  size_t queries = 0;
};

/// Top-down search for nodes that are Invalid while all their non-leaf
/// children are Valid. The root is taken as Invalid (the caller observed a
/// wrong output); descent happens only into Invalid children. Unknown blocks
/// both descent and buggy status. Queries are memoized by goal term.
LocateResult locate_buggy_nodes(const trace::ComputationTree& tree, NodeOracle& oracle,
                                size_t budget = 64, const std::string& context = "");

/// "clause text + instantiated head" blocks for prompt injection.
std::string serialize_buggy_nodes(const LocateResult& result, const logic::Program& program);

/// Valid iff the ground goal succeeds under a known-correct reference program.
class GroundTruthOracle : public NodeOracle {
public:
  GroundTruthOracle(const logic::Program& reference, logic::ResourceLimits limits)
      : ref_(reference), limits_(limits) {}
  Verdict query(const logic::TermPtr& goal_at_exit, const std::string& context) override;

private:
  const logic::Program& ref_;
  logic::ResourceLimits limits_;
};

}  // namespace abpr::apd
