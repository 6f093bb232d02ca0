#include "abpr/arc_bk.hpp"
#include "abpr/engine.hpp"

namespace abpr::logic {

const BuiltinRegistry& default_registry() {
  static const BuiltinRegistry reg = [] {
    BuiltinRegistry r;
    install_core_builtins(r);
    bk::install_arc_bk(r);
    return r;
  }();
  return reg;
}

}  // namespace abpr::logic

namespace abpr {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnsupportedFeature: return "unsupported_feature";
    case ErrorKind::ResourceSteps: return "steps";
    case ErrorKind::ResourceDepth: return "depth";
    case ErrorKind::ResourceTimeout: return "timeout";
    case ErrorKind::Type: return "type";
    case ErrorKind::InvalidMatcher: return "invalid_matcher";
    case ErrorKind::CallableExpected: return "callable_expected";
    case ErrorKind::Format: return "format";
    case ErrorKind::GridInvariant: return "grid_invariant";
    case ErrorKind::PlaceholderUnbound: return "placeholder_unbound";
    case ErrorKind::EmptyResponse: return "empty_response";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::RefinerFailure: return "refiner_failure";
    case ErrorKind::InitializationFailure: return "initialization_failure";
    case ErrorKind::EnsembleFailure: return "ensemble_failure";
    case ErrorKind::EmptyBuffer: return "empty_buffer";
    case ErrorKind::OracleUnavailable: return "oracle_unavailable";
    case ErrorKind::SessionAborted: return "session_aborted";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace abpr
