#pragma once

#include <string>

#include "abpr/program.hpp"

namespace abpr::logic {

/// Parses source text in the engine's Prolog subset.
/// Throws SyntaxError on malformed input and UnsupportedFeatureError for
/// constructs outside the subset (assert/retract, catch/throw, DCG rules,
/// strings, tabling).
Program parse_program(const std::string& source);

/// Parses a single term (no trailing '.'); variables get ids starting at
/// `first_var`. Used for goals typed on the command line.
TermPtr parse_term(const std::string& text, VarId first_var = 0);

}  // namespace abpr::logic
