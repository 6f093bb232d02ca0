#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "abpr/term.hpp"

namespace abpr::logic {

struct Clause {
  TermPtr head;  // Atom or Compound
  TermPtr body;  // goal term; 'true' for facts
  int line = 0;
};

using PredKey = std::pair<std::string, size_t>;  // functor, arity

/// A parsed clause database. Clause order within a predicate is source order.
struct Program {
  std::vector<Clause> clauses;
  std::map<PredKey, std::vector<size_t>> index;  // clause ids per predicate, source order
  std::vector<TermPtr> directives;               // recorded, never executed
  std::string source_text;
  bool uses_bk = false;       // saw ':- use_module(bk).' or ':- module(bk, ...).'
  VarId var_counter = 0;      // first id unused by any clause variable

  const std::vector<size_t>* clauses_for(const std::string& functor, size_t arity) const {
    auto it = index.find({functor, arity});
    return it == index.end() ? nullptr : &it->second;
  }
  bool defines(const std::string& functor, size_t arity) const {
    return clauses_for(functor, arity) != nullptr;
  }
};

/// Canonical clause-by-clause rendering of the program (directives first).
std::string render_program(const Program& p);

}  // namespace abpr::logic
