#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace abpr::logic {

using VarId = std::uint64_t;

class Term;
using TermPtr = std::shared_ptr<const Term>;

/// Immutable Prolog term: atom, integer, variable, or compound.
/// Lists are the usual sugar over './2' terminated by the atom '[]'.
class Term {
public:
  enum class Tag : std::uint8_t { Atom, Int, Var, Compound };

  Tag tag;
  std::string name;           // atom name, compound functor, or variable's source name
  long long ival = 0;         // Int payload
  VarId var = 0;              // Var payload; distinct per clause instantiation
  std::vector<TermPtr> args;  // Compound payload, arity >= 1

  bool is_atom() const { return tag == Tag::Atom; }
  bool is_int() const { return tag == Tag::Int; }
  bool is_var() const { return tag == Tag::Var; }
  bool is_compound() const { return tag == Tag::Compound; }
  bool is_callable() const { return tag == Tag::Atom || tag == Tag::Compound; }
  bool is_atom(const char* n) const { return tag == Tag::Atom && name == n; }
  bool is_functor(const char* n, size_t arity) const {
    return tag == Tag::Compound && args.size() == arity && name == n;
  }
  size_t arity() const { return tag == Tag::Compound ? args.size() : 0; }
};

TermPtr mk_atom(std::string name);
TermPtr mk_int(long long v);
TermPtr mk_var(std::string name, VarId id);
TermPtr mk_compound(std::string functor, std::vector<TermPtr> args);

const TermPtr& nil();         // '[]'
const TermPtr& atom_true();   // 'true'

TermPtr mk_cons(TermPtr head, TermPtr tail);
TermPtr mk_list(const std::vector<TermPtr>& items, TermPtr tail = nullptr);
TermPtr mk_pair(TermPtr a, TermPtr b);  // ','(a, b)

/// Proper-list decomposition; nullopt if the term is not nil-terminated.
std::optional<std::vector<TermPtr>> list_elements(const TermPtr& t);

bool structurally_equal(const TermPtr& a, const TermPtr& b);

/// Standard order of terms: Var < Int < Atom < Compound; vars by id, ints by
/// value, atoms alphabetically, compounds by arity, then functor, then args.
int compare_terms(const TermPtr& a, const TermPtr& b);

bool is_ground(const TermPtr& t);
void collect_vars(const TermPtr& t, std::vector<VarId>& out);

struct RenderOptions {
  bool quote_atoms = true;     // quote atoms that need it
  int max_depth = 0;           // 0 = unlimited; deeper subterms elided as "..."
  int max_list_items = 0;      // 0 = unlimited; longer lists elided as "[a,b,...(+N)]"
};

/// Renders with operator notation and list sugar; parse(render(t)) is
/// structurally equal to t for ground t under default options.
std::string render_term(const TermPtr& t, const RenderOptions& opts = {});

/// "functor/arity" for diagnostics; "name/0" for atoms.
std::string predicate_indicator(const TermPtr& goal);

}  // namespace abpr::logic
