#include "abpr/trace.hpp"

#include <cassert>
#include <memory>
#include <sstream>

namespace abpr::trace {

using logic::Solver;
using logic::Store;
using logic::TermPtr;

namespace {

struct BuildNode {
  ComputationTree::Kind kind;
  TermPtr goal;  // live term; resolved at materialization
  int clause_id = -1;
  std::vector<std::unique_ptr<BuildNode>> children;
};

class Builder : public logic::TraceSink {
public:
  Builder() {
    root_.kind = ComputationTree::Kind::Success;
    stack_.push_back(&root_);
  }

  void enter_clause(const TermPtr& goal, int clause_id) override {
    auto n = std::make_unique<BuildNode>();
    n->kind = ComputationTree::Kind::Success;
    n->goal = goal;
    n->clause_id = clause_id;
    BuildNode* raw = n.get();
    cur().children.push_back(std::move(n));
    stack_.push_back(raw);
  }

  void* exit_clause() override {
    BuildNode* n = stack_.back();
    stack_.pop_back();
    return n;
  }

  void reenter_clause(void* n) override { stack_.push_back(static_cast<BuildNode*>(n)); }

  void fail_clause() override {
    BuildNode* n = stack_.back();
    stack_.pop_back();
    assert(!cur().children.empty() && cur().children.back().get() == n);
    (void)n;
    cur().children.pop_back();
  }

  void leaf_builtin(const TermPtr& goal) override {
    auto n = std::make_unique<BuildNode>();
    n->kind = ComputationTree::Kind::Builtin;
    n->goal = goal;
    cur().children.push_back(std::move(n));
  }

  void leaf_true() override {
    auto n = std::make_unique<BuildNode>();
    n->kind = ComputationTree::Kind::True;
    cur().children.push_back(std::move(n));
  }

  void retract_leaf() override {
    assert(!cur().children.empty());
    cur().children.pop_back();
  }

  size_t mark_children() override { return cur().children.size(); }

  void truncate_children(size_t mark) override {
    if (cur().children.size() > mark) cur().children.resize(mark);
  }

  void note_failure(const TermPtr& goal_resolved, int reason, long long depth) override {
    if (depth <= deepest_) return;  // keep the first (leftmost) at maximal depth
    deepest_ = depth;
    fail_goal_ = goal_resolved;
    fail_reason_ = reason;
  }

  ComputationTree materialize(const Store& store, const TermPtr& top_goal) const {
    std::vector<ComputationTree> tops;
    tops.reserve(root_.children.size());
    for (const auto& c : root_.children) tops.push_back(materialize_rec(*c, store));
    if (tops.size() == 1) return std::move(tops[0]);
    ComputationTree t;
    t.kind = ComputationTree::Kind::Success;
    t.goal = store.resolve(top_goal);
    t.children = std::move(tops);
    return t;
  }

  std::optional<ComputationTree> failure_witness() const {
    if (!fail_goal_) return std::nullopt;
    ComputationTree t;
    t.kind = ComputationTree::Kind::Failure;
    t.goal = fail_goal_;
    t.reason = fail_reason_ == logic::kFailNoClause ? ComputationTree::FailReason::NoClause
               : fail_reason_ == logic::kFailLimit  ? ComputationTree::FailReason::Limit
                                                    : ComputationTree::FailReason::AllClausesFailed;
    return t;
  }

private:
  BuildNode& cur() { return *stack_.back(); }
  const BuildNode& cur() const { return *stack_.back(); }

  static ComputationTree materialize_rec(const BuildNode& n, const Store& store) {
    ComputationTree t;
    t.kind = n.kind;
    t.clause_id = n.clause_id;
    if (n.goal) t.goal = store.resolve(n.goal);
    t.children.reserve(n.children.size());
    for (const auto& c : n.children) t.children.push_back(materialize_rec(*c, store));
    return t;
  }

  BuildNode root_;
  std::vector<BuildNode*> stack_;
  long long deepest_ = -1;
  TermPtr fail_goal_;
  int fail_reason_ = logic::kFailAllClausesFailed;
};

}  // namespace

TracedSolve solve_traced(const logic::Program& program, const logic::TermPtr& goal,
                         const logic::ResourceLimits& limits) {
  Solver solver(program, limits);
  Builder builder;
  solver.set_trace_sink(&builder);

  std::vector<logic::VarId> vars;
  logic::collect_vars(goal, vars);

  TracedSolve out;
  try {
    solver.solve(goal, [&](Solver& s) {
      out.bindings = s.store().snapshot(vars);
      out.tree = builder.materialize(s.store(), goal);
      return true;
    });
  } catch (const ResourceExhausted& e) {
    throw TraceExhausted(e, builder.materialize(solver.store(), goal));
  }
  if (!out.bindings) out.failure = builder.failure_witness();
  return out;
}

namespace {

struct Renderer {
  const TraceRenderOptions& opts;
  std::ostringstream os;
  size_t emitted = 0;
  size_t skipped = 0;

  void emit(const ComputationTree& n, int depth) {
    if (emitted >= opts.max_nodes) {
      skipped += n.node_count();
      return;
    }
    ++emitted;
    os << std::string(static_cast<size_t>(depth) * opts.indent_width, ' ');
    logic::RenderOptions ro;
    ro.max_depth = opts.max_term_depth;
    ro.max_list_items = opts.max_list_items;
    switch (n.kind) {
      case ComputationTree::Kind::True:
        os << "✓ true\n";
        break;
      case ComputationTree::Kind::Success:
        os << "✓ " << logic::render_term(n.goal, ro) << "\n";
        break;
      case ComputationTree::Kind::Builtin:
        os << "• " << logic::render_term(n.goal, ro) << "\n";
        break;
      case ComputationTree::Kind::Failure:
        os << "✗ " << logic::render_term(n.goal, ro) << " (";
        switch (n.reason) {
          case ComputationTree::FailReason::NoClause: os << "no clause"; break;
          case ComputationTree::FailReason::AllClausesFailed: os << "all clauses failed"; break;
          case ComputationTree::FailReason::Limit: os << "limit"; break;
        }
        os << ")\n";
        break;
    }
    for (const auto& c : n.children) emit(c, depth + 1);
  }
};

}  // namespace

std::string render_trace(const ComputationTree& tree, const TraceRenderOptions& opts) {
  Renderer r{opts, {}, 0, 0};
  r.emit(tree, 0);
  if (r.skipped > 0) r.os << "… (" << r.skipped << " nodes elided)\n";
  return r.os.str();
}

}  // namespace abpr::trace
