#pragma once

#include <optional>
#include <string>
#include <vector>

#include "abpr/engine.hpp"
#include "abpr/term.hpp"

namespace abpr::trace {

/// Reified derivation of the first solution: one node per resolved goal,
/// builtin goals as leaves, conjunctions flattened into siblings.
struct ComputationTree {
  enum class Kind { Success, Builtin, Failure, True };
  enum class FailReason { NoClause, AllClausesFailed, Limit };

  Kind kind = Kind::Success;
  logic::TermPtr goal;                  // instantiated at capture time
  int clause_id = -1;                   // Success nodes: index into Program.clauses
  FailReason reason = FailReason::NoClause;
  std::vector<ComputationTree> children;

  size_t node_count() const {
    size_t n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
  }
  bool contains_failure() const {
    if (kind == Kind::Failure) return true;
    for (const auto& c : children)
      if (c.contains_failure()) return true;
    return false;
  }
};

struct TraceRenderOptions {
  size_t max_nodes = 800;
  int max_term_depth = 6;
  int max_list_items = 12;
  int indent_width = 2;
};

struct TracedSolve {
  std::optional<logic::Bindings> bindings;   // first solution, if any
  std::optional<ComputationTree> tree;       // success tree, if solved
  std::optional<ComputationTree> failure;    // leftmost-deepest failure witness
  bool solved() const { return bindings.has_value(); }
};

/// ResourceExhausted with the partial tree built so far attached.
class TraceExhausted : public ResourceExhausted {
public:
  TraceExhausted(const ResourceExhausted& e, ComputationTree partial)
      : ResourceExhausted(e), partial_tree(std::move(partial)) {}
  ComputationTree partial_tree;
};

/// Solves for the first solution while reifying the derivation.
/// Solvability matches plain solve exactly; throws TraceExhausted on limits.
TracedSolve solve_traced(const logic::Program& program, const logic::TermPtr& goal,
                         const logic::ResourceLimits& limits);

/// Indented one-node-per-line text: "✓" success, "✗" failure, "•" builtin.
/// At most max_nodes node lines plus one elision line.
std::string render_trace(const ComputationTree& tree, const TraceRenderOptions& opts = {});

}  // namespace abpr::trace
