#include "abpr/apd.hpp"

#include <sstream>

namespace abpr::apd {

using trace::ComputationTree;

LocateResult locate_buggy_nodes(const ComputationTree& tree, NodeOracle& oracle, size_t budget,
                                const std::string& context) {
  LocateResult res;
  std::map<std::string, Verdict> memo;

  auto ask = [&](const ComputationTree& n, bool& out_of_budget) -> Verdict {
    std::string key = logic::render_term(n.goal);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    if (res.queries >= budget) {
      out_of_budget = true;
      return Verdict::Unknown;
    }
    ++res.queries;
    Verdict v = oracle.query(n.goal, context);
    memo.emplace(std::move(key), v);
    return v;
  };

  struct Item {
    const ComputationTree* node;
    std::vector<size_t> path;
  };
  std::vector<Item> stack{{&tree, {}}};  // every stacked node is Invalid

  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();

    bool all_children_valid = true;
    std::vector<Item> invalid_children;
    for (size_t i = 0; i < item.node->children.size(); ++i) {
      const ComputationTree& child = item.node->children[i];
      if (child.kind != ComputationTree::Kind::Success) continue;  // leaves are Valid by fiat
      bool out_of_budget = false;
      Verdict v = ask(child, out_of_budget);
      if (out_of_budget) {
        res.truncated = true;
        return res;
      }
      if (v != Verdict::Valid) all_children_valid = false;
      if (v == Verdict::Invalid) {
        auto path = item.path;
        path.push_back(i);
        invalid_children.push_back({&child, std::move(path)});
      }
    }
    if (all_children_valid)
      res.nodes.push_back({item.node, item.node->clause_id, item.path});
    // Leftmost-first descent.
    for (auto it = invalid_children.rbegin(); it != invalid_children.rend(); ++it)
      stack.push_back(std::move(*it));
  }
  return res;
}

std::string serialize_buggy_nodes(const LocateResult& result, const logic::Program& program) {
  std::ostringstream os;
  for (const auto& b : result.nodes) {
    os << "candidate buggy clause";
    if (b.clause_id >= 0 && static_cast<size_t>(b.clause_id) < program.clauses.size()) {
      const auto& c = program.clauses[static_cast<size_t>(b.clause_id)];
      os << ":\n  ";
      if (c.body->is_atom("true"))
        os << logic::render_term(c.head) << ".";
      else
        os << logic::render_term(c.head) << " :- " << logic::render_term(c.body) << ".";
    } else {
      os << " (top-level goal):";
    }
    os << "\n  failing instance: " << logic::render_term(b.node->goal) << "\n";
  }
  if (result.truncated) os << "(localization stopped at the query budget)\n";
  return os.str();
}

Verdict GroundTruthOracle::query(const logic::TermPtr& goal_at_exit, const std::string&) {
  logic::Solver s(ref_, limits_);
  return s.solve_first(goal_at_exit) ? Verdict::Valid : Verdict::Invalid;
}

}  // namespace abpr::apd
