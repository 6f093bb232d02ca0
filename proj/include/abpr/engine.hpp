#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "abpr/errors.hpp"
#include "abpr/program.hpp"
#include "abpr/term.hpp"

namespace abpr::logic {

struct ResourceLimits {
  long long max_steps = 2'000'000;
  long long max_depth = 2'048;
  long long timeout_ms = 10'000;
};

/// Idempotent, acyclic substitution. Applying twice equals applying once.
using Bindings = std::map<VarId, TermPtr>;

TermPtr apply_bindings(const TermPtr& t, const Bindings& b);

/// Most general unifier of a and b extending `in`; nullopt on failure.
/// Occurs-check is always on.
std::optional<Bindings> unify(const TermPtr& a, const TermPtr& b, const Bindings& in);

/// Destructive binding store with a trail for backtracking.
class Store {
public:
  size_t mark() const { return trail_.size(); }
  void undo_to(size_t m);

  /// Shallow dereference: follows variable bindings until a non-var or an
  /// unbound var.
  TermPtr walk(const TermPtr& t) const;
  /// Deep substitution of current bindings.
  TermPtr resolve(const TermPtr& t) const;

  bool unify(const TermPtr& a, const TermPtr& b);
  void bind(VarId v, TermPtr t);
  bool occurs(VarId v, const TermPtr& t) const;

  Bindings snapshot(const std::vector<VarId>& vars) const;

private:
  std::unordered_map<VarId, TermPtr> map_;
  std::vector<VarId> trail_;
};

class Solver;

/// Observes the derivation; used by the trace module to reify execution.
class TraceSink {
public:
  virtual ~TraceSink() = default;
  virtual void enter_clause(const TermPtr& goal, int clause_id) = 0;
  virtual void* exit_clause() = 0;          // body solved; returns a node handle
  virtual void reenter_clause(void* n) = 0; // backtracked into the body
  virtual void fail_clause() = 0;           // clause branch abandoned
  virtual void leaf_builtin(const TermPtr& goal) = 0;
  virtual void leaf_true() = 0;
  virtual void retract_leaf() = 0;          // leaf's continuation exhausted
  virtual size_t mark_children() = 0;       // child count of the current node
  virtual void truncate_children(size_t mark) = 0;
  virtual void note_failure(const TermPtr& goal_resolved, int reason, long long depth) = 0;
};

// note_failure reasons
inline constexpr int kFailNoClause = 0;
inline constexpr int kFailAllClausesFailed = 1;
inline constexpr int kFailLimit = 2;

/// Outcome of exploring one branch of the search.
struct Out {
  enum class Sig : std::uint8_t {
    Fail,  // alternatives exhausted; caller keeps backtracking
    Stop,  // solution consumer requested a global stop
    Cut,   // unwinding to the activation identified by `level`
  };
  Sig sig;
  std::uint64_t level = 0;
};

using Cont = std::function<Out()>;
using BuiltinFn = Out (*)(Solver&, const std::vector<TermPtr>&, long long depth, const Cont&);

class BuiltinRegistry {
public:
  void add(const std::string& name, size_t arity, BuiltinFn fn);
  void add_bk(const std::string& name, size_t arity, BuiltinFn fn);
  BuiltinFn find(const std::string& name, size_t arity) const;
  BuiltinFn find_bk(const std::string& name, size_t arity) const;
  bool is_builtin(const std::string& name, size_t arity) const;
  bool is_bk(const std::string& name, size_t arity) const;

private:
  std::map<PredKey, BuiltinFn> core_;
  std::map<PredKey, BuiltinFn> bk_;
};

void install_core_builtins(BuiltinRegistry& reg);

/// Registry with core builtins plus the ARC background-knowledge table.
const BuiltinRegistry& default_registry();

/// Single-threaded SLD resolution engine over one program. Instances are
/// fully isolated; run any number concurrently.
class Solver {
public:
  Solver(const Program& program, ResourceLimits limits,
         const BuiltinRegistry& reg = default_registry());

  /// Enumerates solutions depth-first in clause-source order. The callback
  /// may inspect the store; return true to stop enumeration.
  void solve(const TermPtr& goal, const std::function<bool(Solver&)>& on_solution);

  /// First solution's bindings for the goal's variables, or nullopt.
  std::optional<Bindings> solve_first(const TermPtr& goal);

  /// All solutions, each as bindings over the goal's variables.
  std::vector<Bindings> solve_all(const TermPtr& goal, size_t max_solutions = 0);

  Store& store() { return store_; }
  const Program& program() const { return program_; }
  const BuiltinRegistry& registry() const { return reg_; }
  void set_trace_sink(TraceSink* sink) { trace_ = sink; }
  TraceSink* trace_sink() const { return trace_; }

  // --- used by builtin implementations ---

  Out solve_goal(const TermPtr& goal, std::uint64_t cut_level, long long depth, const Cont& k);
  /// Runs `g` in a fresh cut scope; cut inside is local.
  Out solve_scoped(const TermPtr& g, long long depth, const Cont& k);
  /// First solution of `g`, keeping its bindings. Returns whether it succeeded.
  bool solve_once_keep(const TermPtr& g, long long depth);
  /// Enumerates `g`, invoking `each` per solution (return true to stop),
  /// then undoes all bindings. Tracing is suspended for the sub-derivation.
  void enumerate(const TermPtr& g, long long depth, const std::function<bool()>& each);

  TermPtr rename_fresh(const TermPtr& t);
  long long eval_arith(const TermPtr& t);
  void bump_step(const TermPtr& goal, long long depth);
  VarId fresh_var_id() { return var_counter_++; }
  TermPtr fresh_var() { return mk_var("", fresh_var_id()); }

  [[noreturn]] void throw_type_error(const TermPtr& goal, const std::string& culprit);

private:
  Out solve_user(const TermPtr& goal, const std::string& functor, long long depth, const Cont& k);
  Out solve_ite(const TermPtr& c, const TermPtr& t, const TermPtr& e, std::uint64_t cut_level,
                long long depth, const Cont& k);
  Out dispatch_builtin(BuiltinFn fn, const TermPtr& goal, const std::vector<TermPtr>& args,
                       long long depth, const Cont& k);
  TermPtr rename_rec(const TermPtr& t, std::unordered_map<VarId, TermPtr>& fresh);

  const Program& program_;
  ResourceLimits limits_;
  const BuiltinRegistry& reg_;
  Store store_;
  TraceSink* trace_ = nullptr;
  VarId var_counter_;
  std::uint64_t activation_counter_ = 1;
  long long steps_ = 0;
  std::chrono::steady_clock::time_point deadline_;
  bool has_deadline_ = false;
};

/// Convenience wrappers constructing a solver per call.
std::vector<Bindings> solve_all(const Program& p, const TermPtr& goal, const ResourceLimits& lim,
                                size_t max_solutions = 0);
std::optional<Bindings> solve_first(const Program& p, const TermPtr& goal,
                                    const ResourceLimits& lim);

/// call/N-style partial application: appends `extra` to the goal's argument
/// list, descending through module qualification.
TermPtr extend_goal(Solver& s, const TermPtr& base, const std::vector<TermPtr>& extra);

/// Proper-list decomposition with dereferencing through the store.
std::optional<std::vector<TermPtr>> proper_list(Store& st, const TermPtr& t);

}  // namespace abpr::logic
