#include <algorithm>

#include "abpr/engine.hpp"

namespace abpr::logic {

namespace {

constexpr auto kFail = Out{Out::Sig::Fail};

Out unify_then(Solver& s, const TermPtr& a, const TermPtr& b, const Cont& k) {
  Store& st = s.store();
  size_t m = st.mark();
  if (!st.unify(a, b)) {
    st.undo_to(m);
    return kFail;
  }
  Out r = k();
  if (r.sig == Out::Sig::Fail) st.undo_to(m);
  return r;
}

long long require_int(Solver& s, const TermPtr& goal, const TermPtr& t) {
  TermPtr w = s.store().walk(t);
  if (!w->is_int()) s.throw_type_error(goal, "expected an integer, got " + render_term(w));
  return w->ival;
}

bool exists_solution(Solver& s, const TermPtr& g, long long depth) {
  Store& st = s.store();
  size_t m = st.mark();
  bool found = s.solve_once_keep(g, depth);
  st.undo_to(m);
  return found;
}

// --- unification and comparison ---

Out bi_unify(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return unify_then(s, a[0], a[1], k);
}

Out bi_not_unify(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  size_t m = st.mark();
  bool u = st.unify(a[0], a[1]);
  st.undo_to(m);
  return u ? kFail : k();
}

Out bi_equal(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return structurally_equal(s.store().resolve(a[0]), s.store().resolve(a[1])) ? k() : kFail;
}

Out bi_not_equal(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return structurally_equal(s.store().resolve(a[0]), s.store().resolve(a[1])) ? kFail : k();
}

template <int Rel>
Out bi_order(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  int c = compare_terms(s.store().resolve(a[0]), s.store().resolve(a[1]));
  bool ok = Rel == 0 ? c < 0 : Rel == 1 ? c > 0 : Rel == 2 ? c <= 0 : c >= 0;
  return ok ? k() : kFail;
}

// --- arithmetic ---

Out bi_is(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return unify_then(s, a[0], mk_int(s.eval_arith(a[1])), k);
}

template <int Rel>
Out bi_arith_cmp(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  long long x = s.eval_arith(a[0]);
  long long y = s.eval_arith(a[1]);
  bool ok = false;
  switch (Rel) {
    case 0: ok = x == y; break;
    case 1: ok = x != y; break;
    case 2: ok = x < y; break;
    case 3: ok = x > y; break;
    case 4: ok = x <= y; break;
    case 5: ok = x >= y; break;
  }
  return ok ? k() : kFail;
}

// --- type tests ---

Out bi_var(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return s.store().walk(a[0])->is_var() ? k() : kFail;
}
Out bi_nonvar(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return s.store().walk(a[0])->is_var() ? kFail : k();
}
Out bi_number(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return s.store().walk(a[0])->is_int() ? k() : kFail;
}
Out bi_atom(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return s.store().walk(a[0])->is_atom() ? k() : kFail;
}
Out bi_atomic(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  TermPtr w = s.store().walk(a[0]);
  return w->is_atom() || w->is_int() ? k() : kFail;
}
Out bi_callable(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return s.store().walk(a[0])->is_callable() ? k() : kFail;
}
Out bi_is_list(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return proper_list(s.store(), a[0]) ? k() : kFail;
}

// --- univ ---

Out bi_univ(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  TermPtr lhs = s.store().walk(a[0]);
  if (!lhs->is_var()) {
    std::vector<TermPtr> items;
    if (lhs->is_compound()) {
      items.push_back(mk_atom(lhs->name));
      items.insert(items.end(), lhs->args.begin(), lhs->args.end());
    } else {
      items.push_back(lhs);
    }
    return unify_then(s, a[1], mk_list(items), k);
  }
  auto items = proper_list(s.store(), a[1]);
  if (!items || items->empty()) s.throw_type_error(a[1], "=../2 needs a non-empty list");
  TermPtr head = s.store().walk((*items)[0]);
  if (items->size() == 1) return unify_then(s, a[0], head, k);
  if (!head->is_atom()) s.throw_type_error(a[1], "functor must be an atom");
  std::vector<TermPtr> args(items->begin() + 1, items->end());
  return unify_then(s, a[0], mk_compound(head->name, std::move(args)), k);
}

// --- all-solutions ---

Out bi_findall(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  std::vector<TermPtr> results;
  s.enumerate(a[1], depth + 1, [&]() {
    results.push_back(s.rename_fresh(s.store().resolve(a[0])));
    return false;
  });
  return unify_then(s, a[2], mk_list(results), k);
}

Out bi_forall(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  bool all = true;
  s.enumerate(a[0], depth + 1, [&]() {
    if (!exists_solution(s, a[1], depth + 1)) all = false;
    return !all;
  });
  return all ? k() : kFail;
}

// --- list predicates ---

Out bi_between(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  TermPtr goal = mk_compound("between", {a[0], a[1], a[2]});
  long long lo = require_int(s, goal, a[0]);
  long long hi = require_int(s, goal, a[1]);
  TermPtr x = s.store().walk(a[2]);
  if (x->is_int()) return x->ival >= lo && x->ival <= hi ? k() : kFail;
  if (!x->is_var()) return kFail;
  for (long long i = lo; i <= hi; ++i) {
    Out r = unify_then(s, x, mk_int(i), k);
    if (r.sig != Out::Sig::Fail) return r;
  }
  return kFail;
}

Out bi_length(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  Store& st = s.store();
  TermPtr spine = st.walk(a[0]);
  long long prefix = 0;
  while (spine->is_functor(".", 2)) {
    ++prefix;
    spine = st.walk(spine->args[1]);
  }
  if (spine->is_atom("[]")) return unify_then(s, a[1], mk_int(prefix), k);
  if (!spine->is_var()) return kFail;
  TermPtr n = st.walk(a[1]);
  auto extend = [&](long long total) -> Out {
    std::vector<TermPtr> fresh;
    for (long long i = prefix; i < total; ++i) fresh.push_back(s.fresh_var());
    size_t m = st.mark();
    if (st.unify(spine, mk_list(fresh)) && st.unify(a[1], mk_int(total))) {
      Out r = k();
      if (r.sig == Out::Sig::Fail) st.undo_to(m);
      return r;
    }
    st.undo_to(m);
    return kFail;
  };
  if (n->is_int()) {
    if (n->ival < prefix) return kFail;
    return extend(n->ival);
  }
  if (!n->is_var()) return kFail;
  for (long long total = prefix;; ++total) {
    s.bump_step(a[0], depth);
    Out r = extend(total);
    if (r.sig != Out::Sig::Fail) return r;
  }
}

Out bi_member(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  TermPtr spine = st.walk(a[1]);
  while (spine->is_functor(".", 2)) {
    Out r = unify_then(s, a[0], spine->args[0], k);
    if (r.sig != Out::Sig::Fail) return r;
    spine = st.walk(spine->args[1]);
  }
  return kFail;
}

Out bi_memberchk(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  Store& st = s.store();
  TermPtr spine = st.walk(a[1]);
  while (spine->is_functor(".", 2)) {
    size_t m = st.mark();
    if (st.unify(a[0], spine->args[0])) {
      Out r = k();
      if (r.sig == Out::Sig::Fail) st.undo_to(m);
      return r;
    }
    st.undo_to(m);
    spine = st.walk(spine->args[1]);
  }
  return kFail;
}

Out append_rec(Solver& s, const TermPtr& a, const TermPtr& b, const TermPtr& c, long long depth,
               const Cont& k) {
  s.bump_step(a, depth);
  Store& st = s.store();
  TermPtr x = st.walk(a);
  if (x->is_atom("[]")) return unify_then(s, b, c, k);
  if (x->is_functor(".", 2)) {
    TermPtr ct = s.fresh_var();
    size_t m = st.mark();
    if (!st.unify(c, mk_cons(x->args[0], ct))) {
      st.undo_to(m);
      return kFail;
    }
    Out r = append_rec(s, x->args[1], b, ct, depth + 1, k);
    if (r.sig == Out::Sig::Fail) st.undo_to(m);
    return r;
  }
  if (!x->is_var()) return kFail;
  {
    size_t m = st.mark();
    if (st.unify(x, nil()) && st.unify(b, c)) {
      Out r = k();
      if (r.sig != Out::Sig::Fail) return r;
    }
    st.undo_to(m);
  }
  size_t m = st.mark();
  TermPtr h = s.fresh_var(), t = s.fresh_var(), ct = s.fresh_var();
  if (st.unify(x, mk_cons(h, t)) && st.unify(c, mk_cons(h, ct))) {
    Out r = append_rec(s, t, b, ct, depth + 1, k);
    if (r.sig == Out::Sig::Fail) st.undo_to(m);
    return r;
  }
  st.undo_to(m);
  return kFail;
}

Out bi_append(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  return append_rec(s, a[0], a[1], a[2], depth, k);
}

Out bi_reverse(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  auto items = proper_list(s.store(), a[0]);
  if (!items) return kFail;
  std::reverse(items->begin(), items->end());
  return unify_then(s, a[1], mk_list(*items), k);
}

Out nth_impl(Solver& s, const std::vector<TermPtr>& a, long long base, const Cont& k) {
  Store& st = s.store();
  TermPtr idx = st.walk(a[0]);
  if (idx->is_int()) {
    long long want = idx->ival - base;
    if (want < 0) return kFail;
    TermPtr spine = st.walk(a[1]);
    while (spine->is_functor(".", 2)) {
      if (want == 0) return unify_then(s, a[2], spine->args[0], k);
      --want;
      spine = st.walk(spine->args[1]);
    }
    return kFail;
  }
  if (!idx->is_var()) return kFail;
  long long i = base;
  TermPtr spine = st.walk(a[1]);
  while (spine->is_functor(".", 2)) {
    size_t m = st.mark();
    if (st.unify(idx, mk_int(i)) && st.unify(a[2], spine->args[0])) {
      Out r = k();
      if (r.sig != Out::Sig::Fail) return r;
    }
    st.undo_to(m);
    ++i;
    spine = st.walk(spine->args[1]);
  }
  return kFail;
}

Out bi_nth0(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return nth_impl(s, a, 0, k);
}
Out bi_nth1(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  return nth_impl(s, a, 1, k);
}

Out bi_sort(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  auto items = proper_list(s.store(), a[0]);
  if (!items) return kFail;
  std::vector<TermPtr> resolved;
  resolved.reserve(items->size());
  for (const auto& t : *items) resolved.push_back(s.store().resolve(t));
  std::stable_sort(resolved.begin(), resolved.end(),
                   [](const TermPtr& x, const TermPtr& y) { return compare_terms(x, y) < 0; });
  resolved.erase(std::unique(resolved.begin(), resolved.end(),
                             [](const TermPtr& x, const TermPtr& y) {
                               return compare_terms(x, y) == 0;
                             }),
                 resolved.end());
  return unify_then(s, a[1], mk_list(resolved), k);
}

template <bool Min>
Out bi_minmax_list(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  auto items = proper_list(s.store(), a[0]);
  if (!items || items->empty()) return kFail;
  TermPtr goal = mk_compound(Min ? "min_list" : "max_list", {a[0], a[1]});
  long long best = require_int(s, goal, (*items)[0]);
  for (size_t i = 1; i < items->size(); ++i) {
    long long v = require_int(s, goal, (*items)[i]);
    if (Min ? v < best : v > best) best = v;
  }
  return unify_then(s, a[1], mk_int(best), k);
}

void flatten_rec(Store& st, const TermPtr& t, std::vector<TermPtr>& out) {
  TermPtr w = st.walk(t);
  if (w->is_atom("[]")) return;
  if (w->is_functor(".", 2)) {
    flatten_rec(st, w->args[0], out);
    flatten_rec(st, w->args[1], out);
    return;
  }
  out.push_back(w);
}

Out bi_flatten(Solver& s, const std::vector<TermPtr>& a, long long, const Cont& k) {
  TermPtr w = s.store().walk(a[0]);
  if (!w->is_atom("[]") && !w->is_functor(".", 2)) return kFail;
  std::vector<TermPtr> out;
  flatten_rec(s.store(), a[0], out);
  return unify_then(s, a[1], mk_list(out), k);
}

// --- higher order ---

Out bi_include(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  auto items = proper_list(s.store(), a[1]);
  if (!items) return kFail;
  std::vector<TermPtr> kept;
  for (const auto& e : *items) {
    TermPtr g = extend_goal(s, a[0], {e});
    if (s.solve_once_keep(g, depth + 1)) kept.push_back(e);
  }
  return unify_then(s, a[2], mk_list(kept), k);
}

Out maplist_rec(Solver& s, const TermPtr& goal, const std::vector<TermPtr>& lists,
                long long depth, const Cont& k) {
  s.bump_step(goal, depth);
  Store& st = s.store();
  {
    size_t m = st.mark();
    bool all_nil = true;
    for (const auto& l : lists)
      if (!st.unify(l, nil())) {
        all_nil = false;
        break;
      }
    if (all_nil) {
      Out r = k();
      if (r.sig != Out::Sig::Fail) return r;
    }
    st.undo_to(m);
  }
  size_t m = st.mark();
  std::vector<TermPtr> heads, tails;
  for (const auto& l : lists) {
    TermPtr h = s.fresh_var(), t = s.fresh_var();
    if (!st.unify(l, mk_cons(h, t))) {
      st.undo_to(m);
      return kFail;
    }
    heads.push_back(h);
    tails.push_back(t);
  }
  TermPtr g = extend_goal(s, goal, heads);
  std::uint64_t scope_unused = 0;
  (void)scope_unused;
  Out r = s.solve_scoped(g, depth + 1, [&]() -> Out {
    return maplist_rec(s, goal, tails, depth + 1, k);
  });
  if (r.sig == Out::Sig::Fail) st.undo_to(m);
  return r;
}

template <size_t N>
Out bi_maplist(Solver& s, const std::vector<TermPtr>& a, long long depth, const Cont& k) {
  std::vector<TermPtr> lists(a.begin() + 1, a.end());
  // Internals are hidden behind the builtin leaf in traces.
  TraceSink* saved = s.trace_sink();
  s.set_trace_sink(nullptr);
  Out r;
  try {
    r = maplist_rec(s, a[0], lists, depth, [&]() -> Out {
      s.set_trace_sink(saved);
      Out rk = k();
      s.set_trace_sink(nullptr);
      return rk;
    });
  } catch (...) {
    s.set_trace_sink(saved);
    throw;
  }
  s.set_trace_sink(saved);
  return r;
}

}  // namespace

TermPtr extend_goal(Solver& s, const TermPtr& base, const std::vector<TermPtr>& extra) {
  TermPtr b = s.store().walk(base);
  if (b->is_functor(":", 2))
    return mk_compound(":", {b->args[0], extend_goal(s, b->args[1], extra)});
  if (!b->is_callable()) s.throw_type_error(b, "closure is not callable");
  if (extra.empty()) return b;
  std::vector<TermPtr> args;
  if (b->is_compound()) args = b->args;
  args.insert(args.end(), extra.begin(), extra.end());
  return mk_compound(b->name, std::move(args));
}

std::optional<std::vector<TermPtr>> proper_list(Store& st, const TermPtr& t) {
  std::vector<TermPtr> out;
  TermPtr spine = st.walk(t);
  while (spine->is_functor(".", 2)) {
    out.push_back(spine->args[0]);
    spine = st.walk(spine->args[1]);
  }
  if (!spine->is_atom("[]")) return std::nullopt;
  return out;
}

void install_core_builtins(BuiltinRegistry& reg) {
  reg.add("=", 2, bi_unify);
  reg.add("\\=", 2, bi_not_unify);
  reg.add("==", 2, bi_equal);
  reg.add("\\==", 2, bi_not_equal);
  reg.add("@<", 2, bi_order<0>);
  reg.add("@>", 2, bi_order<1>);
  reg.add("@=<", 2, bi_order<2>);
  reg.add("@>=", 2, bi_order<3>);
  reg.add("is", 2, bi_is);
  reg.add("=:=", 2, bi_arith_cmp<0>);
  reg.add("=\\=", 2, bi_arith_cmp<1>);
  reg.add("<", 2, bi_arith_cmp<2>);
  reg.add(">", 2, bi_arith_cmp<3>);
  reg.add("=<", 2, bi_arith_cmp<4>);
  reg.add(">=", 2, bi_arith_cmp<5>);
  reg.add("var", 1, bi_var);
  reg.add("nonvar", 1, bi_nonvar);
  reg.add("number", 1, bi_number);
  reg.add("integer", 1, bi_number);
  reg.add("atom", 1, bi_atom);
  reg.add("atomic", 1, bi_atomic);
  reg.add("callable", 1, bi_callable);
  reg.add("is_list", 1, bi_is_list);
  reg.add("=..", 2, bi_univ);
  reg.add("findall", 3, bi_findall);
  reg.add("forall", 2, bi_forall);
  reg.add("between", 3, bi_between);
  reg.add("length", 2, bi_length);
  reg.add("member", 2, bi_member);
  reg.add("memberchk", 2, bi_memberchk);
  reg.add("append", 3, bi_append);
  reg.add("reverse", 2, bi_reverse);
  reg.add("nth0", 3, bi_nth0);
  reg.add("nth1", 3, bi_nth1);
  reg.add("sort", 2, bi_sort);
  reg.add("min_list", 2, bi_minmax_list<true>);
  reg.add("max_list", 2, bi_minmax_list<false>);
  reg.add("flatten", 2, bi_flatten);
  reg.add("include", 3, bi_include);
  reg.add("maplist", 2, bi_maplist<2>);
  reg.add("maplist", 3, bi_maplist<3>);
  reg.add("maplist", 4, bi_maplist<4>);
}

}  // namespace abpr::logic
