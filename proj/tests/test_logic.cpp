#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <set>

#include "abpr/engine.hpp"
#include "abpr/parser.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace abpr::logic;
using abpr::Error;
using abpr::ErrorKind;
using abpr::ResourceExhausted;
using abpr::Rng;
using abpr::SyntaxError;
using abpr::TypeError;
using abpr::UnsupportedFeatureError;

namespace {

std::vector<std::string> solutions(const std::string& src, const std::string& goal_s,
                                   size_t cap = 0, ResourceLimits lim = {}) {
  Program p = parse_program(src);
  TermPtr goal = parse_term(goal_s, p.var_counter);
  Solver s(p, lim);
  std::vector<std::string> out;
  s.solve(goal, [&](Solver& sv) {
    out.push_back(render_term(sv.store().resolve(goal)));
    return cap != 0 && out.size() >= cap;
  });
  return out;
}

}  // namespace

TEST_CASE("ground term render/parse round trip") {
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    TermPtr t = testsupport::random_ground_term(rng, 3);
    TermPtr back = parse_term(render_term(t));
    CHECK(structurally_equal(t, back));
  }
}

TEST_CASE("standard order of terms") {
  TermPtr v = mk_var("X", 0), i = mk_int(5), a = mk_atom("zeta"), b = mk_atom("alpha");
  TermPtr c = mk_compound("f", {mk_int(1)});
  TermPtr d = mk_compound("f", {mk_int(1), mk_int(2)});
  TermPtr e = mk_compound("g", {mk_int(1)});
  CHECK(compare_terms(v, i) < 0);
  CHECK(compare_terms(i, a) < 0);
  CHECK(compare_terms(a, c) < 0);
  CHECK(compare_terms(b, a) < 0);   // alphabetical
  CHECK(compare_terms(c, d) < 0);   // arity before functor
  CHECK(compare_terms(c, e) < 0);   // functor
  CHECK(compare_terms(mk_compound("f", {mk_int(1)}), mk_compound("f", {mk_int(2)})) < 0);
}

TEST_CASE("parse single fact") {
  Program p = parse_program("f(a).");
  REQUIRE(p.clauses.size() == 1);
  CHECK(render_term(p.clauses[0].head) == "f(a)");
  CHECK(p.clauses[0].body->is_atom("true"));
}

TEST_CASE("background-knowledge reference listing parses with all exports") {
  Program p = parse_program(testsupport::read_file(testsupport::corpus_path("bk_reference.pl")));
  CHECK(p.uses_bk);  // module(bk, ...) recorded
  const std::vector<std::pair<std::string, size_t>> exports = {
      {"grid_dimensions", 3}, {"grid_cell", 4},          {"grid_in_bounds", 3},
      {"grid_neighbors4", 4}, {"collect_points", 4},     {"connected_components", 3},
      {"components_with_holes", 4}, {"component_bbox", 2}, {"component_hole_count", 3},
      {"component_hole_count", 4},  {"apply_component_labels", 4}, {"map_grid_cells", 3}};
  for (const auto& [name, arity] : exports) {
    INFO(name << "/" << arity);
    CHECK(p.defines(name, arity));
  }
}

TEST_CASE("task iteration listings parse without error") {
  for (const char* name :
       {"b0039139_iter1.pl", "b0039139_iter2.pl", "t9aaea919_iter1.pl", "t9aaea919_iter2.pl",
        "t9aaea919_iter3.pl", "t9aaea919_iter4.pl", "relabel_by_holes.pl",
        "fill_regions_by_size.pl", "recolor_simple.pl"}) {
    INFO(name);
    Program p = parse_program(testsupport::read_file(testsupport::corpus_path(name)));
    CHECK(p.defines("solve", 2));
    CHECK(p.uses_bk);
  }
}

TEST_CASE("syntax errors carry position") {
  try {
    parse_program("f(a.\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line() >= 1);
    CHECK(e.column() >= 1);
  }
}

TEST_CASE("subset boundary rejected at parse time") {
  CHECK_THROWS_AS(parse_program("a :- assert(b)."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program("a :- retract(b)."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program("a :- catch(b, E, c)."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program("a :- throw(oops)."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program("greeting --> [hello]."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program(":- table foo/1."), UnsupportedFeatureError);
  CHECK_THROWS_AS(parse_program("p(\"text\")."), UnsupportedFeatureError);
}

TEST_CASE("directives are recorded, never executed") {
  Program p = parse_program(":- use_module(bk).\nf(x).");
  REQUIRE(p.directives.size() == 1);
  CHECK(p.uses_bk);
  CHECK(p.clauses.size() == 1);
}

TEST_CASE("operator precedence shapes") {
  Program p = parse_program("x :- a, b -> c ; d.");
  CHECK(render_term(p.clauses[0].body) == "a,b->c;d");
  CHECK(solutions("y(Z) :- Z is 1 + 2 * 3 - 4.", "y(Z)") ==
        std::vector<std::string>{"y(3)"});
}

TEST_CASE("unify: textbook mgu") {
  TermPtr x = mk_var("X", 0), y = mk_var("Y", 1);
  TermPtr a = mk_compound("f", {x, mk_atom("b")});
  TermPtr b = mk_compound("f", {mk_atom("a"), y});
  auto mgu = unify(a, b, {});
  REQUIRE(mgu.has_value());
  CHECK(render_term(apply_bindings(a, *mgu)) == "f(a,b)");
  CHECK(render_term(apply_bindings(b, *mgu)) == "f(a,b)");
}

TEST_CASE("unify: occurs check") {
  TermPtr x = mk_var("X", 0);
  CHECK_FALSE(unify(x, mk_compound("f", {x}), {}).has_value());
}

TEST_CASE("unify: random ground terms against structural equality") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    TermPtr t = testsupport::random_ground_term(rng, 3);
    auto self = unify(t, t, {});
    REQUIRE(self.has_value());
    CHECK(self->empty());  // ground self-unification binds nothing
    TermPtr u = testsupport::random_ground_term(rng, 3);
    CHECK(unify(t, u, {}).has_value() == structurally_equal(t, u));
  }
}

TEST_CASE("unify: mgu property on randomized terms") {
  Rng rng(13);
  const std::vector<TermPtr> universe = {mk_atom("a"), mk_atom("b"), mk_int(0),
                                         mk_compound("f", {mk_atom("a")})};
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    TermPtr a = testsupport::random_term_with_vars(rng, 2);
    TermPtr b = testsupport::random_term_with_vars(rng, 2);
    auto sigma = unify(a, b, {});
    std::vector<VarId> vars;
    collect_vars(a, vars);
    collect_vars(b, vars);

    if (sigma) {
      ++checked;
      TermPtr sa = apply_bindings(a, *sigma);
      TermPtr sb = apply_bindings(b, *sigma);
      CHECK(structurally_equal(sa, sb));
      // Idempotence.
      CHECK(structurally_equal(apply_bindings(sa, *sigma), sa));
    }
    if (vars.size() > 3) continue;

    // Brute-force unifier search over a small ground universe: every ground
    // unifier must factor through sigma (and exist only if sigma does).
    size_t combos = 1;
    for (size_t v = 0; v < vars.size(); ++v) combos *= universe.size();
    for (size_t mask = 0; mask < combos; ++mask) {
      Bindings theta;
      size_t m = mask;
      for (VarId v : vars) {
        theta[v] = universe[m % universe.size()];
        m /= universe.size();
      }
      TermPtr ta = apply_bindings(a, theta);
      TermPtr tb = apply_bindings(b, theta);
      if (!structurally_equal(ta, tb)) continue;
      REQUIRE_MESSAGE(sigma.has_value(), "ground unifier exists but mgu failed");
      // theta = delta compose sigma: applying theta after sigma equals theta.
      CHECK(structurally_equal(apply_bindings(apply_bindings(a, *sigma), theta), ta));
    }
  }
  CHECK(checked > 50);  // the generator must actually produce unifiable pairs
}

TEST_CASE("solve: between enumeration in order") {
  CHECK(solutions("q(X) :- between(1,3,X).", "q(X)") ==
        std::vector<std::string>{"q(1)", "q(2)", "q(3)"});
}

TEST_CASE("solve: cut commits to the first clause") {
  CHECK(solutions("p(1). p(2).", "(p(X), !)") == std::vector<std::string>{"p(1),!"});
}

TEST_CASE("solve: cut confinement inside called predicate") {
  // The cut inside q/1 must not prune p/1's alternatives.
  auto sols = solutions("q(X) :- member(X, [1,2]), !.\np(Y) :- member(Y, [a,b]), q(_).", "p(Y)");
  CHECK(sols == std::vector<std::string>{"p(a)", "p(b)"});
}

TEST_CASE("solve: unknown predicates fail without error") {
  CHECK(solutions("f(a).", "missing(x)").empty());
}

TEST_CASE("solve: negation, if-then-else, disjunction") {
  CHECK(solutions("n(X) :- \\+ member(X, [2,4]).", "n(3)") == std::vector<std::string>{"n(3)"});
  CHECK(solutions("n(X) :- \\+ member(X, [2,4]).", "n(2)").empty());
  CHECK(solutions("t(X,Y) :- (X > 2 -> Y = big ; Y = small).", "t(5,R)") ==
        std::vector<std::string>{"t(5,big)"});
  CHECK(solutions("t(X,Y) :- (X > 2 -> Y = big ; Y = small).", "t(1,R)") ==
        std::vector<std::string>{"t(1,small)"});
  CHECK(solutions("d(X) :- (X = l ; X = r).", "d(X)") ==
        std::vector<std::string>{"d(l)", "d(r)"});
}

TEST_CASE("solve: library predicates behave as documented") {
  CHECK(solutions("", "append(A, B, [1,2])") ==
        std::vector<std::string>{"append([],[1,2],[1,2])", "append([1],[2],[1,2])",
                                 "append([1,2],[],[1,2])"});
  CHECK(solutions("", "nth0(I, [a,b,c], E)").size() == 3);
  CHECK(solutions("", "nth1(2, [a,b,c], E)") ==
        std::vector<std::string>{"nth1(2,[a,b,c],b)"});
  CHECK(solutions("", "(length(L, 2), maplist(=(0), L))") ==
        std::vector<std::string>{"length([0,0],2),maplist(=(0),[0,0])"});
  CHECK(solutions("", "sort([c,a,b,a], S)") ==
        std::vector<std::string>{"sort([c,a,b,a],[a,b,c])"});
  CHECK(solutions("", "reverse([1,2,3], R)") ==
        std::vector<std::string>{"reverse([1,2,3],[3,2,1])"});
  CHECK(solutions("", "flatten([[1,2],[3,[4]]], F)") ==
        std::vector<std::string>{"flatten([[1,2],[3,[4]]],[1,2,3,4])"});
  CHECK(solutions("even(X) :- 0 is X mod 2.", "include(even, [1,2,3,4], L)") ==
        std::vector<std::string>{"include(even,[1,2,3,4],[2,4])"});
  CHECK(solutions("", "min_list([3,1,2], M)") ==
        std::vector<std::string>{"min_list([3,1,2],1)"});
  CHECK(solutions("", "max_list([3,1,2], M)") ==
        std::vector<std::string>{"max_list([3,1,2],3)"});
  CHECK(solutions("", "forall(member(X, [1,2,3]), X > 0)").size() == 1);
  CHECK(solutions("", "forall(member(X, [1,2,3]), X > 1)").empty());
  CHECK(solutions("", "T =.. [foo, 1, 2]") ==
        std::vector<std::string>{"foo(1,2)=..[foo,1,2]"});
  CHECK(solutions("", "f(a,b) =.. L") ==
        std::vector<std::string>{"f(a,b)=..[f,a,b]"});
  CHECK(solutions("", "findall(X-Y, (member(X,[1,2]), member(Y,[a,b])), L)").size() == 1);
  CHECK(solutions("", "memberchk(X, [1,2,3])") ==
        std::vector<std::string>{"memberchk(1,[1,2,3])"});
}

TEST_CASE("solve: integer arithmetic") {
  CHECK(solutions("", "X is 7 // 2") == std::vector<std::string>{"3 is 7//2"});
  CHECK(solutions("", "X is 7 / 2") == std::vector<std::string>{"3 is 7/2"});
  CHECK(solutions("", "X is -7 mod 3") == std::vector<std::string>{"2 is -7 mod 3"});
  CHECK(solutions("", "X is max(2, 5)") == std::vector<std::string>{"5 is max(2,5)"});
  CHECK(solutions("", "X is min(2, 5)") == std::vector<std::string>{"2 is min(2,5)"});
  CHECK(solutions("", "X is abs(-4)") == std::vector<std::string>{"4 is abs(-4)"});
}

TEST_CASE("solve: type errors") {
  Program p = parse_program("bad(X) :- X is a + 1.");
  TermPtr goal = parse_term("bad(X)", p.var_counter);
  Solver s(p, {});
  CHECK_THROWS_AS(s.solve(goal, [](Solver&) { return true; }), TypeError);
}

TEST_CASE("solve: resource limits trip") {
  ResourceLimits lim;
  lim.max_steps = 1000;
  Program p = parse_program("loop :- loop.");
  TermPtr goal = parse_term("loop", p.var_counter);
  Solver s(p, lim);
  try {
    s.solve(goal, [](Solver&) { return true; });
    FAIL("expected ResourceExhausted");
  } catch (const ResourceExhausted& e) {
    CHECK(std::string(e.resource_name()) == "steps");
  }
}

TEST_CASE("solve: determinism of solution sequences") {
  const char* src = "e(X, Y) :- member(X, [1,2,3]), member(Y, [a,b]), \\+ (X = 2, Y = a).";
  auto a = solutions(src, "e(X, Y)");
  auto b = solutions(src, "e(X, Y)");
  CHECK(a == b);
  CHECK(a.size() == 5);
}

TEST_CASE("solve: module-qualified and imported bk goals") {
  CHECK(solutions(":- use_module(bk).\nd(R, C) :- bk:grid_dimensions([[1,2],[3,4]], R, C).",
                  "d(R, C)") == std::vector<std::string>{"d(2,2)"});
  // Unqualified after use_module(bk).
  CHECK(solutions(":- use_module(bk).\nd(R, C) :- grid_dimensions([[1,2,3]], R, C).",
                  "d(R, C)") == std::vector<std::string>{"d(1,3)"});
  // User clauses shadow bk imports.
  CHECK(solutions(":- use_module(bk).\ngrid_dimensions(_, 0, 0).\n"
                  "d(R, C) :- grid_dimensions([[1]], R, C).",
                  "d(R, C)") == std::vector<std::string>{"d(0,0)"});
}

TEST_CASE("engine matches the brute-force SLD enumerator on random programs") {
  Rng rng(2024);
  int validated = 0;
  int attempts = 0;
  while (validated < 100 && attempts < 1000) {
    ++attempts;
    testsupport::RandomProgram rp = testsupport::random_logic_program(rng);
    Program prog;
    try {
      prog = parse_program(rp.source);
    } catch (const Error&) {
      continue;  // operator-position collisions in generated text are skipped
    }
    TermPtr goal = parse_term(rp.goal_text, prog.var_counter);

    std::vector<std::string> engine_sols;
    try {
      ResourceLimits lim;
      lim.max_steps = 200'000;
      lim.timeout_ms = 0;
      Solver s(prog, lim);
      bool overflow = false;
      s.solve(goal, [&](Solver& sv) {
        engine_sols.push_back(render_term(sv.store().resolve(goal)));
        if (engine_sols.size() > 300) {
          overflow = true;
          return true;
        }
        return false;
      });
      if (overflow) continue;
    } catch (const ResourceExhausted&) {
      continue;  // nonterminating draw; regenerate
    }

    std::vector<std::string> naive_sols;
    try {
      testsupport::NaiveSolver naive(prog, 2'000'000);
      for (const auto& t : naive.run(goal)) naive_sols.push_back(render_term(t));
    } catch (const testsupport::NaiveExhausted&) {
      continue;
    }

    // Canonicalize fresh-variable numbering so sharing patterns compare.
    auto norm = [](const std::string& s) {
      std::string out;
      std::map<std::string, int> ids;
      for (size_t i2 = 0; i2 < s.size(); ++i2) {
        if (s.compare(i2, 2, "_G") == 0) {
          size_t j = i2 + 2;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
          std::string id = s.substr(i2, j - i2);
          auto [it, fresh] = ids.emplace(id, static_cast<int>(ids.size()));
          out += "_V" + std::to_string(it->second);
          i2 = j - 1;
        } else {
          out.push_back(s[i2]);
        }
      }
      return out;
    };
    INFO("program:\n" << rp.source << "goal: " << rp.goal_text);
    REQUIRE(engine_sols.size() == naive_sols.size());
    for (size_t i = 0; i < engine_sols.size(); ++i) CHECK(norm(engine_sols[i]) == norm(naive_sols[i]));
    ++validated;
  }
  CHECK(validated == 100);
}
