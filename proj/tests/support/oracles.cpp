#include "oracles.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace testsupport {

using abpr::logic::mk_atom;
using abpr::logic::mk_compound;
using abpr::logic::mk_int;
using abpr::logic::mk_var;
using abpr::logic::Term;

// ---------------------------------------------------------------------------
// Naive SLD enumerator
// ---------------------------------------------------------------------------

void NaiveSolver::step() {
  if (++steps_ > max_steps_) throw NaiveExhausted{};
}

TermPtr NaiveSolver::walk(const TermPtr& t, const Subst& s) const {
  TermPtr cur = t;
  while (cur->is_var()) {
    auto it = s.find(cur->var);
    if (it == s.end()) return cur;
    cur = it->second;
  }
  return cur;
}

TermPtr NaiveSolver::resolve(const TermPtr& t, const Subst& s) const {
  TermPtr w = walk(t, s);
  if (!w->is_compound()) return w;
  std::vector<TermPtr> args;
  for (const auto& a : w->args) args.push_back(resolve(a, s));
  return mk_compound(w->name, std::move(args));
}

bool NaiveSolver::occurs(VarId v, const TermPtr& t, const Subst& s) const {
  TermPtr w = walk(t, s);
  if (w->is_var()) return w->var == v;
  if (!w->is_compound()) return false;
  for (const auto& a : w->args)
    if (occurs(v, a, s)) return true;
  return false;
}

std::optional<NaiveSolver::Subst> NaiveSolver::unify(const TermPtr& a, const TermPtr& b,
                                                     Subst s) const {
  TermPtr x = walk(a, s), y = walk(b, s);
  if (x->is_var()) {
    if (y->is_var() && x->var == y->var) return s;
    if (occurs(x->var, y, s)) return std::nullopt;
    s[x->var] = y;
    return s;
  }
  if (y->is_var()) {
    if (occurs(y->var, x, s)) return std::nullopt;
    s[y->var] = x;
    return s;
  }
  if (x->tag != y->tag) return std::nullopt;
  if (x->is_atom()) return x->name == y->name ? std::optional<Subst>(std::move(s)) : std::nullopt;
  if (x->is_int()) return x->ival == y->ival ? std::optional<Subst>(std::move(s)) : std::nullopt;
  if (x->name != y->name || x->args.size() != y->args.size()) return std::nullopt;
  std::optional<Subst> cur = std::move(s);
  for (size_t i = 0; i < x->args.size(); ++i) {
    cur = unify(x->args[i], y->args[i], std::move(*cur));
    if (!cur) return std::nullopt;
  }
  return cur;
}

TermPtr NaiveSolver::rename(const TermPtr& t, std::map<VarId, TermPtr>& m) {
  if (t->is_var()) {
    auto it = m.find(t->var);
    if (it != m.end()) return it->second;
    TermPtr v = mk_var(t->name, counter_++);
    m[t->var] = v;
    return v;
  }
  if (!t->is_compound()) return t;
  std::vector<TermPtr> args;
  for (const auto& a : t->args) args.push_back(rename(a, m));
  return mk_compound(t->name, std::move(args));
}

long long NaiveSolver::eval(const TermPtr& t, const Subst& s) const {
  TermPtr w = walk(t, s);
  if (w->is_int()) return w->ival;
  if (w->is_compound() && w->args.size() == 2) {
    long long a = eval(w->args[0], s), b = eval(w->args[1], s);
    if (w->name == "+") return a + b;
    if (w->name == "-") return a - b;
    if (w->name == "*") return a * b;
  }
  if (w->is_compound() && w->args.size() == 1 && w->name == "-") return -eval(w->args[0], s);
  throw NaiveExhausted{};  // outside the oracle's arithmetic subset
}

NaiveSolver::NOut NaiveSolver::nsolve(const TermPtr& goal, const Subst& s) {
  step();
  TermPtr g = walk(goal, s);
  if (g->is_atom("true")) return {{s}, false};
  if (g->is_atom("fail") || g->is_atom("false")) return {{}, false};
  if (g->is_atom("!")) return {{s}, true};

  if (g->is_functor(",", 2)) {
    NOut r1 = nsolve(g->args[0], s);
    NOut out;
    for (const auto& th : r1.sols) {
      NOut r2 = nsolve(g->args[1], th);
      for (auto& x : r2.sols) out.sols.push_back(std::move(x));
      if (r2.cut) {
        out.cut = true;
        return out;
      }
    }
    out.cut = r1.cut;
    return out;
  }
  if (g->is_functor(";", 2)) {
    TermPtr lhs = walk(g->args[0], s);
    if (lhs->is_functor("->", 2)) {
      NOut rc = nsolve(lhs->args[0], s);
      if (!rc.sols.empty()) return nsolve(lhs->args[1], rc.sols[0]);
      return nsolve(g->args[1], s);
    }
    NOut ra = nsolve(g->args[0], s);
    if (ra.cut) return ra;
    NOut rb = nsolve(g->args[1], s);
    NOut out;
    out.sols = std::move(ra.sols);
    for (auto& x : rb.sols) out.sols.push_back(std::move(x));
    out.cut = rb.cut;
    return out;
  }
  if (g->is_functor("->", 2)) {
    NOut rc = nsolve(g->args[0], s);
    if (!rc.sols.empty()) return nsolve(g->args[1], rc.sols[0]);
    return {{}, false};
  }
  if (g->is_functor("\\+", 1) || g->is_functor("not", 1)) {
    NOut rg = nsolve(g->args[0], s);
    if (rg.sols.empty()) return {{s}, false};
    return {{}, false};
  }
  if (g->is_functor("=", 2)) {
    auto u = unify(g->args[0], g->args[1], s);
    if (u) return {{*u}, false};
    return {{}, false};
  }
  if (g->is_functor("\\=", 2)) {
    auto u = unify(g->args[0], g->args[1], s);
    if (u) return {{}, false};
    return {{s}, false};
  }
  if (g->is_functor("is", 2)) {
    auto u = unify(g->args[0], mk_int(eval(g->args[1], s)), s);
    if (u) return {{*u}, false};
    return {{}, false};
  }
  if (g->is_compound() &&
      (g->name == "<" || g->name == ">" || g->name == "=<" || g->name == ">=") &&
      g->args.size() == 2) {
    long long a = eval(g->args[0], s), b = eval(g->args[1], s);
    bool ok = g->name == "<" ? a < b : g->name == ">" ? a > b : g->name == "=<" ? a <= b : a >= b;
    return {ok ? std::vector<Subst>{s} : std::vector<Subst>{}, false};
  }
  return solve_user(g, s);
}

NaiveSolver::NOut NaiveSolver::solve_user(const TermPtr& goal, const Subst& s) {
  const auto* ids = program_.clauses_for(goal->name, goal->arity());
  if (!ids) return {{}, false};  // unknown predicates fail
  NOut out;
  for (size_t id : *ids) {
    step();
    std::map<VarId, TermPtr> m;
    const auto& c = program_.clauses[id];
    TermPtr head = rename(c.head, m);
    auto u = unify(head, goal, s);
    if (!u) continue;
    TermPtr body = rename(c.body, m);
    NOut rb = nsolve(body, *u);
    for (auto& x : rb.sols) out.sols.push_back(std::move(x));
    if (rb.cut) break;  // cut absorbed at this activation
  }
  return out;
}

std::vector<TermPtr> NaiveSolver::run(const TermPtr& goal) {
  NOut r = nsolve(goal, {});
  std::vector<TermPtr> out;
  out.reserve(r.sols.size());
  for (const auto& s : r.sols) out.push_back(resolve(goal, s));
  return out;
}

// ---------------------------------------------------------------------------
// Random logic programs
// ---------------------------------------------------------------------------

RandomProgram random_logic_program(abpr::Rng& rng) {
  const std::vector<std::pair<std::string, int>> preds = {
      {"p", 1}, {"q", 1}, {"r", 1}, {"t", 2}, {"u", 0}};
  const std::vector<std::string> consts = {"a", "b", "c", "1", "2"};
  const std::vector<std::string> vars = {"X", "Y", "Z"};

  auto rand_arg = [&](bool allow_var) {
    if (allow_var && rng.below(2) == 0) return vars[rng.below(vars.size())];
    return consts[rng.below(consts.size())];
  };
  auto rand_callable = [&](bool allow_var) {
    const auto& [name, arity] = preds[rng.below(preds.size())];
    if (arity == 0) return name;
    std::string out = name + "(";
    for (int i = 0; i < arity; ++i) {
      if (i) out += ",";
      out += rand_arg(allow_var);
    }
    return out + ")";
  };

  std::ostringstream src;
  size_t clause_count = 3 + rng.below(4);  // 3..6
  for (size_t ci = 0; ci < clause_count; ++ci) {
    std::string head = rand_callable(true);
    size_t body_len = rng.below(4);  // 0..3
    if (body_len == 0) {
      src << head << ".\n";
      continue;
    }
    src << head << " :- ";
    for (size_t bi = 0; bi < body_len; ++bi) {
      if (bi) src << ", ";
      switch (rng.below(8)) {
        case 0: src << "!"; break;
        case 1: src << "\\+ " << rand_callable(false); break;
        case 2: src << vars[rng.below(vars.size())] << " = " << rand_arg(true); break;
        default: src << rand_callable(true); break;
      }
    }
    src << ".\n";
  }

  const auto& [gname, garity] = preds[rng.below(preds.size())];
  std::string goal = gname;
  if (garity > 0) {
    goal += "(";
    for (int i = 0; i < garity; ++i) {
      if (i) goal += ",";
      goal += vars[static_cast<size_t>(i)];
    }
    goal += ")";
  }
  return {src.str(), goal};
}

// ---------------------------------------------------------------------------
// Grid oracles
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

std::vector<abpr::bk::Component> uf_components(const CellGrid& g, const CellPred& match) {
  auto idx = [&](long long r, long long c) {
    return static_cast<size_t>((r - 1) * g.cols + (c - 1));
  };
  auto matching = [&](long long r, long long c) {
    return r >= 1 && r <= g.rows && c >= 1 && c <= g.cols && match(g.value_at(r, c));
  };
  UnionFind uf(static_cast<size_t>(std::max<long long>(1, g.rows * g.cols)));
  for (long long r = 1; r <= g.rows; ++r)
    for (long long c = 1; c <= g.cols; ++c) {
      if (!matching(r, c)) continue;
      if (matching(r + 1, c)) uf.join(idx(r, c), idx(r + 1, c));
      if (matching(r, c + 1)) uf.join(idx(r, c), idx(r, c + 1));
    }
  // Seeds are the first matching cells in row-major order, but only those
  // that are collectible (present in a short row).
  std::map<size_t, abpr::bk::Component> comps;  // root -> component
  std::vector<size_t> order;
  for (long long r = 1; r <= g.rows; ++r)
    for (long long c = 1; c <= g.cols; ++c) {
      if (!g.present(r, c) || !matching(r, c)) continue;
      size_t root = uf.find(idx(r, c));
      auto it = comps.find(root);
      if (it == comps.end()) {
        abpr::bk::Component comp;
        comp.value = g.value_at(r, c);
        comps.emplace(root, std::move(comp));
        order.push_back(root);
      }
    }
  // Every connected matching cell (present or padded) joins its component.
  for (long long r = 1; r <= g.rows; ++r)
    for (long long c = 1; c <= g.cols; ++c) {
      if (!matching(r, c)) continue;
      size_t root = uf.find(idx(r, c));
      auto it = comps.find(root);
      if (it != comps.end()) it->second.cells.push_back({r, c});
    }
  std::vector<abpr::bk::Component> out;
  for (size_t root : order) {
    auto& comp = comps[root];
    std::sort(comp.cells.begin(), comp.cells.end());
    out.push_back(std::move(comp));
  }
  return out;
}

long long flood_hole_oracle(const CellGrid& g, const std::vector<Coord>& cells,
                            const CellPred& bg) {
  if (cells.empty()) return 0;
  long long minr = cells[0].first, maxr = cells[0].first;
  long long minc = cells[0].second, maxc = cells[0].second;
  for (const auto& [r, c] : cells) {
    minr = std::min(minr, r);
    maxr = std::max(maxr, r);
    minc = std::min(minc, c);
    maxc = std::max(maxc, c);
  }
  --minr;
  ++maxr;
  --minc;
  ++maxc;
  std::set<Coord> comp(cells.begin(), cells.end());
  auto is_bg = [&](long long r, long long c) {
    return !comp.count({r, c}) && bg(g.value_at(r, c));
  };

  std::set<Coord> outside;
  std::vector<Coord> work;
  for (long long r = minr; r <= maxr; ++r)
    for (long long c = minc; c <= maxc; ++c)
      if ((r == minr || r == maxr || c == minc || c == maxc) && is_bg(r, c))
        work.push_back({r, c});
  while (!work.empty()) {
    auto [r, c] = work.back();
    work.pop_back();
    if (outside.count({r, c})) continue;
    outside.insert({r, c});
    for (const auto& [nr, nc] :
         {Coord{r - 1, c}, Coord{r + 1, c}, Coord{r, c - 1}, Coord{r, c + 1}})
      if (nr >= minr && nr <= maxr && nc >= minc && nc <= maxc && is_bg(nr, nc) &&
          !outside.count({nr, nc}))
        work.push_back({nr, nc});
  }

  std::set<Coord> seen;
  long long holes = 0;
  for (long long r = minr; r <= maxr; ++r)
    for (long long c = minc; c <= maxc; ++c) {
      if (!is_bg(r, c) || outside.count({r, c}) || seen.count({r, c})) continue;
      ++holes;
      std::vector<Coord> q{{r, c}};
      while (!q.empty()) {
        auto [qr, qc] = q.back();
        q.pop_back();
        if (seen.count({qr, qc})) continue;
        seen.insert({qr, qc});
        for (const auto& [nr, nc] :
             {Coord{qr - 1, qc}, Coord{qr + 1, qc}, Coord{qr, qc - 1}, Coord{qr, qc + 1}})
          if (nr >= minr && nr <= maxr && nc >= minc && nc <= maxc && is_bg(nr, nc) &&
              !outside.count({nr, nc}) && !seen.count({nr, nc}))
            q.push_back({nr, nc});
      }
    }
  return holes;
}

abpr::bk::Grid random_grid(abpr::Rng& rng, size_t max_dim) {
  size_t rows = 1 + rng.below(max_dim);
  size_t cols = 1 + rng.below(max_dim);
  std::vector<std::vector<int>> data(rows, std::vector<int>(cols, 0));
  for (auto& row : data)
    for (auto& cell : row) {
      // Half zeros, half colors: enough structure for blobs and holes.
      cell = rng.below(2) == 0 ? 0 : static_cast<int>(1 + rng.below(9));
    }
  return abpr::bk::Grid::from_rows(data);
}

TermPtr random_ground_term(abpr::Rng& rng, int depth) {
  const std::vector<std::string> atoms = {"a", "b", "c"};
  const std::vector<std::string> functors = {"f", "g", "h"};
  if (depth <= 0 || rng.below(3) == 0) {
    if (rng.below(2) == 0) return mk_atom(atoms[rng.below(atoms.size())]);
    return mk_int(static_cast<long long>(rng.below(10)));
  }
  size_t arity = 1 + rng.below(3);
  std::vector<TermPtr> args;
  for (size_t i = 0; i < arity; ++i) args.push_back(random_ground_term(rng, depth - 1));
  return mk_compound(functors[rng.below(functors.size())], std::move(args));
}

TermPtr random_term_with_vars(abpr::Rng& rng, int depth) {
  if (depth <= 0 || rng.below(4) == 0) {
    switch (rng.below(3)) {
      case 0: return mk_var("V", rng.below(3));
      case 1: return mk_atom(rng.below(2) == 0 ? "a" : "b");
      default: return mk_int(static_cast<long long>(rng.below(3)));
    }
  }
  size_t arity = 1 + rng.below(2);
  std::vector<TermPtr> args;
  for (size_t i = 0; i < arity; ++i) args.push_back(random_term_with_vars(rng, depth - 1));
  return mk_compound(rng.below(2) == 0 ? "f" : "g", std::move(args));
}

}  // namespace testsupport
