#include "abpr/engine.hpp"

#include <algorithm>

namespace abpr::logic {

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

void Store::undo_to(size_t m) {
  while (trail_.size() > m) {
    map_.erase(trail_.back());
    trail_.pop_back();
  }
}

TermPtr Store::walk(const TermPtr& t) const {
  TermPtr cur = t;
  while (cur->is_var()) {
    auto it = map_.find(cur->var);
    if (it == map_.end()) return cur;
    cur = it->second;
  }
  return cur;
}

TermPtr Store::resolve(const TermPtr& t) const {
  TermPtr w = walk(t);
  if (!w->is_compound()) return w;
  bool changed = false;
  std::vector<TermPtr> args;
  args.reserve(w->args.size());
  for (const auto& a : w->args) {
    TermPtr r = resolve(a);
    if (r.get() != a.get()) changed = true;
    args.push_back(std::move(r));
  }
  if (!changed) return w;
  return mk_compound(w->name, std::move(args));
}

void Store::bind(VarId v, TermPtr t) {
  map_.emplace(v, std::move(t));
  trail_.push_back(v);
}

bool Store::occurs(VarId v, const TermPtr& t) const {
  TermPtr w = walk(t);
  switch (w->tag) {
    case Term::Tag::Var: return w->var == v;
    case Term::Tag::Compound:
      for (const auto& a : w->args)
        if (occurs(v, a)) return true;
      return false;
    default: return false;
  }
}

bool Store::unify(const TermPtr& a, const TermPtr& b) {
  TermPtr x = walk(a), y = walk(b);
  if (x->is_var()) {
    if (y->is_var() && y->var == x->var) return true;
    if (occurs(x->var, y)) return false;
    bind(x->var, y);
    return true;
  }
  if (y->is_var()) {
    if (occurs(y->var, x)) return false;
    bind(y->var, x);
    return true;
  }
  if (x->tag != y->tag) return false;
  switch (x->tag) {
    case Term::Tag::Atom: return x->name == y->name;
    case Term::Tag::Int: return x->ival == y->ival;
    case Term::Tag::Compound: {
      if (x->name != y->name || x->args.size() != y->args.size()) return false;
      for (size_t i = 0; i < x->args.size(); ++i)
        if (!unify(x->args[i], y->args[i])) return false;
      return true;
    }
    default: return false;
  }
}

Bindings Store::snapshot(const std::vector<VarId>& vars) const {
  Bindings out;
  for (VarId v : vars) {
    auto it = map_.find(v);
    if (it == map_.end()) continue;
    out[v] = resolve(it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Functional unification API
// ---------------------------------------------------------------------------

TermPtr apply_bindings(const TermPtr& t, const Bindings& b) {
  switch (t->tag) {
    case Term::Tag::Var: {
      auto it = b.find(t->var);
      return it == b.end() ? t : it->second;
    }
    case Term::Tag::Compound: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      bool changed = false;
      for (const auto& a : t->args) {
        TermPtr r = apply_bindings(a, b);
        if (r.get() != a.get()) changed = true;
        args.push_back(std::move(r));
      }
      return changed ? mk_compound(t->name, std::move(args)) : t;
    }
    default: return t;
  }
}

std::optional<Bindings> unify(const TermPtr& a, const TermPtr& b, const Bindings& in) {
  Store s;
  for (const auto& [v, t] : in) s.bind(v, t);
  if (!s.unify(a, b)) return std::nullopt;
  std::vector<VarId> vars;
  collect_vars(a, vars);
  collect_vars(b, vars);
  for (const auto& [v, t] : in) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    collect_vars(t, vars);
  }
  return s.snapshot(vars);
}

// ---------------------------------------------------------------------------
// Builtin registry
// ---------------------------------------------------------------------------

void BuiltinRegistry::add(const std::string& name, size_t arity, BuiltinFn fn) {
  core_[{name, arity}] = fn;
}
void BuiltinRegistry::add_bk(const std::string& name, size_t arity, BuiltinFn fn) {
  bk_[{name, arity}] = fn;
}
BuiltinFn BuiltinRegistry::find(const std::string& name, size_t arity) const {
  auto it = core_.find({name, arity});
  return it == core_.end() ? nullptr : it->second;
}
BuiltinFn BuiltinRegistry::find_bk(const std::string& name, size_t arity) const {
  auto it = bk_.find({name, arity});
  return it == bk_.end() ? nullptr : it->second;
}
bool BuiltinRegistry::is_builtin(const std::string& name, size_t arity) const {
  if (core_.count({name, arity})) return true;
  // Control constructs are builtins for leaf/unknown-predicate purposes.
  static const std::map<PredKey, int> control = {
      {{"true", 0}, 0}, {{"fail", 0}, 0}, {{"false", 0}, 0}, {{"!", 0}, 0},
      {{",", 2}, 0},    {{";", 2}, 0},    {{"->", 2}, 0},    {{"\\+", 1}, 0},
      {{"not", 1}, 0},  {{":", 2}, 0},
  };
  if (control.count({name, arity})) return true;
  if (name == "call" && arity >= 1 && arity <= 8) return true;
  return false;
}
bool BuiltinRegistry::is_bk(const std::string& name, size_t arity) const {
  return bk_.count({name, arity}) > 0;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

namespace {

struct TraceSuspend {
  Solver& s;
  TraceSink* saved;
  explicit TraceSuspend(Solver& solver) : s(solver), saved(solver.trace_sink()) {
    s.set_trace_sink(nullptr);
  }
  ~TraceSuspend() { s.set_trace_sink(saved); }
};

constexpr auto kFail = Out{Out::Sig::Fail};
constexpr auto kStop = Out{Out::Sig::Stop};

}  // namespace

Solver::Solver(const Program& program, ResourceLimits limits, const BuiltinRegistry& reg)
    : program_(program), limits_(limits), reg_(reg), var_counter_(program.var_counter) {}

void Solver::bump_step(const TermPtr& goal, long long depth) {
  ++steps_;
  if (steps_ > limits_.max_steps) {
    if (trace_) trace_->note_failure(store_.resolve(goal), kFailLimit, depth);
    throw ResourceExhausted(ResourceExhausted::What::Steps,
                            "resolution step limit exceeded (" +
                                std::to_string(limits_.max_steps) + ")");
  }
  if (depth > limits_.max_depth) {
    if (trace_) trace_->note_failure(store_.resolve(goal), kFailLimit, depth);
    throw ResourceExhausted(ResourceExhausted::What::Depth,
                            "derivation depth limit exceeded (" +
                                std::to_string(limits_.max_depth) + ")");
  }
  if (has_deadline_ && (steps_ & 0xFF) == 0 &&
      std::chrono::steady_clock::now() > deadline_) {
    if (trace_) trace_->note_failure(store_.resolve(goal), kFailLimit, depth);
    throw ResourceExhausted(ResourceExhausted::What::Timeout,
                            "wall timeout exceeded (" + std::to_string(limits_.timeout_ms) +
                                " ms)");
  }
}

void Solver::throw_type_error(const TermPtr& goal, const std::string& culprit) {
  throw TypeError(render_term(store_.resolve(goal)), culprit);
}

TermPtr Solver::rename_rec(const TermPtr& t, std::unordered_map<VarId, TermPtr>& fresh) {
  switch (t->tag) {
    case Term::Tag::Var: {
      auto it = fresh.find(t->var);
      if (it != fresh.end()) return it->second;
      TermPtr v = mk_var(t->name, fresh_var_id());
      fresh.emplace(t->var, v);
      return v;
    }
    case Term::Tag::Compound: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      for (const auto& a : t->args) args.push_back(rename_rec(a, fresh));
      return mk_compound(t->name, std::move(args));
    }
    default: return t;
  }
}

TermPtr Solver::rename_fresh(const TermPtr& t) {
  std::unordered_map<VarId, TermPtr> fresh;
  return rename_rec(t, fresh);
}

Out Solver::solve_goal(const TermPtr& goal, std::uint64_t cut_level, long long depth,
                       const Cont& k) {
  bump_step(goal, depth);
  TermPtr g = store_.walk(goal);
  if (g->is_var()) throw_type_error(g, "unbound goal");
  if (g->is_int()) throw_type_error(g, "integer is not callable");

  const std::string& f = g->name;
  size_t arity = g->arity();

  // Control constructs.
  if (g->is_atom()) {
    if (f == "true") {
      if (!trace_) return k();
      trace_->leaf_true();
      Out r = k();
      if (r.sig == Out::Sig::Fail) trace_->retract_leaf();
      return r;
    }
    if (f == "fail" || f == "false") return kFail;
    if (f == "!") {
      if (trace_) trace_->leaf_builtin(g);
      Out r = k();
      if (r.sig == Out::Sig::Fail) {
        if (trace_) trace_->retract_leaf();
        return Out{Out::Sig::Cut, cut_level};
      }
      return r;
    }
  } else {
    if (f == "," && arity == 2) {
      TermPtr a = g->args[0], b = g->args[1];
      return solve_goal(a, cut_level, depth,
                        [this, b, cut_level, depth, &k]() {
                          return solve_goal(b, cut_level, depth, k);
                        });
    }
    if (f == ";" && arity == 2) {
      TermPtr lhs = store_.walk(g->args[0]);
      if (lhs->is_functor("->", 2))
        return solve_ite(lhs->args[0], lhs->args[1], g->args[1], cut_level, depth, k);
      size_t m = store_.mark();
      Out r = solve_goal(g->args[0], cut_level, depth + 1, k);
      if (r.sig != Out::Sig::Fail) return r;
      store_.undo_to(m);
      return solve_goal(g->args[1], cut_level, depth + 1, k);
    }
    if (f == "->" && arity == 2)
      return solve_ite(g->args[0], g->args[1], nullptr, cut_level, depth, k);
    if ((f == "\\+" || f == "not") && arity == 1) {
      size_t m = store_.mark();
      bool proved;
      {
        TraceSuspend ts(*this);
        std::uint64_t scope = activation_counter_++;
        proved = false;
        solve_goal(g->args[0], scope, depth + 1, [&proved]() -> Out {
          proved = true;
          return kStop;
        });
      }
      store_.undo_to(m);
      if (proved) return kFail;
      if (!trace_) return k();
      trace_->leaf_builtin(g);
      Out r = k();
      if (r.sig == Out::Sig::Fail) trace_->retract_leaf();
      return r;
    }
    if (f == ":" && arity == 2) {
      TermPtr mod = store_.walk(g->args[0]);
      TermPtr inner = store_.walk(g->args[1]);
      if (!inner->is_callable()) throw_type_error(g, "qualified goal is not callable");
      if (mod->is_atom("bk")) {
        if (BuiltinFn fn = reg_.find_bk(inner->name, inner->arity()))
          return dispatch_builtin(fn, g, inner->is_compound() ? inner->args : std::vector<TermPtr>{},
                                  depth, k);
      }
      return solve_goal(inner, cut_level, depth, k);
    }
    if (f == "call" && arity >= 1) {
      std::vector<TermPtr> extra(g->args.begin() + 1, g->args.end());
      TermPtr built = extend_goal(*this, g->args[0], extra);
      return solve_scoped(built, depth + 1, k);
    }
  }

  if (BuiltinFn fn = reg_.find(f, arity))
    return dispatch_builtin(fn, g, g->is_compound() ? g->args : std::vector<TermPtr>{}, depth, k);

  return solve_user(g, f, depth, k);
}

Out Solver::solve_ite(const TermPtr& c, const TermPtr& t, const TermPtr& e,
                      std::uint64_t cut_level, long long depth, const Cont& k) {
  size_t m = store_.mark();
  size_t cm = trace_ ? trace_->mark_children() : 0;
  std::uint64_t scope = activation_counter_++;
  bool cond = false;
  Out r = solve_goal(c, scope, depth + 1, [&cond]() -> Out {
    cond = true;
    return kStop;
  });
  if (cond) {
    Out rt = solve_goal(t, cut_level, depth + 1, k);
    if (rt.sig == Out::Sig::Fail) {
      store_.undo_to(m);
      if (trace_) trace_->truncate_children(cm);
    }
    return rt;
  }
  store_.undo_to(m);
  if (trace_) trace_->truncate_children(cm);
  if (r.sig == Out::Sig::Cut && r.level != scope) return r;
  if (!e) return kFail;
  return solve_goal(e, cut_level, depth + 1, k);
}

Out Solver::dispatch_builtin(BuiltinFn fn, const TermPtr& goal, const std::vector<TermPtr>& args,
                             long long depth, const Cont& k) {
  if (!trace_) return fn(*this, args, depth, k);
  long long solutions = 0;
  Cont k2 = [this, &goal, &k, &solutions]() -> Out {
    ++solutions;
    if (!trace_) return k();
    trace_->leaf_builtin(goal);
    Out r = k();
    if (r.sig == Out::Sig::Fail && trace_) trace_->retract_leaf();
    return r;
  };
  Out r = fn(*this, args, depth, k2);
  if (r.sig == Out::Sig::Fail && solutions == 0 && trace_)
    trace_->note_failure(store_.resolve(goal), kFailAllClausesFailed, depth);
  return r;
}

Out Solver::solve_user(const TermPtr& goal, const std::string& functor, long long depth,
                       const Cont& k) {
  size_t arity = goal->arity();
  const std::vector<size_t>* ids = program_.clauses_for(functor, arity);
  if (!ids) {
    // Imported bk predicates are callable unqualified when the program
    // recorded ':- use_module(bk).' and does not define them itself.
    if (program_.uses_bk) {
      if (BuiltinFn fn = reg_.find_bk(functor, arity))
        return dispatch_builtin(fn, goal,
                                goal->is_compound() ? goal->args : std::vector<TermPtr>{}, depth,
                                k);
    }
    if (trace_) trace_->note_failure(store_.resolve(goal), kFailNoClause, depth);
    return kFail;
  }

  std::uint64_t level = activation_counter_++;
  size_t m = store_.mark();
  for (size_t id : *ids) {
    store_.undo_to(m);
    std::unordered_map<VarId, TermPtr> fresh;
    const Clause& c = program_.clauses[id];
    TermPtr head = rename_rec(c.head, fresh);
    if (!store_.unify(head, goal)) continue;
    TermPtr body = rename_rec(c.body, fresh);
    if (trace_) trace_->enter_clause(goal, static_cast<int>(id));
    Cont kexit = [this, &k]() -> Out {
      if (!trace_) return k();
      void* n = trace_->exit_clause();
      Out r = k();
      if (r.sig != Out::Sig::Stop && trace_) trace_->reenter_clause(n);
      return r;
    };
    Out r = solve_goal(body, level, depth + 1, kexit);
    if (r.sig == Out::Sig::Stop) return r;
    if (r.sig == Out::Sig::Cut) {
      if (trace_) trace_->fail_clause();
      store_.undo_to(m);
      if (r.level == level) return kFail;
      return r;
    }
    if (trace_) trace_->fail_clause();
  }
  store_.undo_to(m);
  if (trace_) trace_->note_failure(store_.resolve(goal), kFailAllClausesFailed, depth);
  return kFail;
}

Out Solver::solve_scoped(const TermPtr& g, long long depth, const Cont& k) {
  std::uint64_t scope = activation_counter_++;
  Out r = solve_goal(g, scope, depth, k);
  if (r.sig == Out::Sig::Cut && r.level == scope) return kFail;
  return r;
}

bool Solver::solve_once_keep(const TermPtr& g, long long depth) {
  TraceSuspend ts(*this);
  std::uint64_t scope = activation_counter_++;
  bool found = false;
  solve_goal(g, scope, depth, [&found]() -> Out {
    found = true;
    return kStop;
  });
  return found;
}

void Solver::enumerate(const TermPtr& g, long long depth, const std::function<bool()>& each) {
  TraceSuspend ts(*this);
  size_t m = store_.mark();
  std::uint64_t scope = activation_counter_++;
  solve_goal(g, scope, depth, [&each]() -> Out { return each() ? kStop : kFail; });
  store_.undo_to(m);
}

long long Solver::eval_arith(const TermPtr& t) {
  TermPtr w = store_.walk(t);
  switch (w->tag) {
    case Term::Tag::Int: return w->ival;
    case Term::Tag::Var: throw_type_error(w, "arithmetic expression is unbound");
    case Term::Tag::Atom: throw_type_error(w, "atom '" + w->name + "' is not a number");
    case Term::Tag::Compound: break;
  }
  const std::string& f = w->name;
  if (w->args.size() == 1) {
    long long a = eval_arith(w->args[0]);
    if (f == "-") return -a;
    if (f == "+") return a;
    if (f == "abs") return a < 0 ? -a : a;
    throw_type_error(w, "unknown arithmetic function " + f + "/1");
  }
  if (w->args.size() == 2) {
    long long a = eval_arith(w->args[0]);
    long long b = eval_arith(w->args[1]);
    if (f == "+") return a + b;
    if (f == "-") return a - b;
    if (f == "*") return a * b;
    if (f == "//" || f == "/") {
      if (b == 0) throw_type_error(w, "zero divisor");
      return a / b;
    }
    if (f == "mod") {
      if (b == 0) throw_type_error(w, "zero divisor");
      long long r = a % b;
      if (r != 0 && ((r < 0) != (b < 0))) r += b;
      return r;
    }
    if (f == "min") return a < b ? a : b;
    if (f == "max") return a > b ? a : b;
    throw_type_error(w, "unknown arithmetic function " + f + "/2");
  }
  throw_type_error(w, "unknown arithmetic function");
}

void Solver::solve(const TermPtr& goal, const std::function<bool(Solver&)>& on_solution) {
  if (!has_deadline_ && limits_.timeout_ms > 0) {
    deadline_ = std::chrono::steady_clock::now() + std::chrono::milliseconds(limits_.timeout_ms);
    has_deadline_ = true;
  }
  std::vector<VarId> goal_vars;
  collect_vars(goal, goal_vars);
  for (VarId v : goal_vars) var_counter_ = std::max(var_counter_, v + 1);
  std::uint64_t top = activation_counter_++;
  solve_goal(goal, top, 0, [this, &on_solution]() -> Out {
    return on_solution(*this) ? kStop : kFail;
  });
}

std::optional<Bindings> Solver::solve_first(const TermPtr& goal) {
  std::vector<VarId> vars;
  collect_vars(goal, vars);
  std::optional<Bindings> result;
  solve(goal, [&](Solver& s) {
    result = s.store().snapshot(vars);
    return true;
  });
  return result;
}

std::vector<Bindings> Solver::solve_all(const TermPtr& goal, size_t max_solutions) {
  std::vector<VarId> vars;
  collect_vars(goal, vars);
  std::vector<Bindings> out;
  solve(goal, [&](Solver& s) {
    out.push_back(s.store().snapshot(vars));
    return max_solutions != 0 && out.size() >= max_solutions;
  });
  return out;
}

std::vector<Bindings> solve_all(const Program& p, const TermPtr& goal, const ResourceLimits& lim,
                                size_t max_solutions) {
  Solver s(p, lim);
  return s.solve_all(goal, max_solutions);
}

std::optional<Bindings> solve_first(const Program& p, const TermPtr& goal,
                                    const ResourceLimits& lim) {
  Solver s(p, lim);
  return s.solve_first(goal);
}

}  // namespace abpr::logic
