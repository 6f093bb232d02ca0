#pragma once

#include <stdexcept>
#include <string>

namespace abpr {

enum class ErrorKind {
  Syntax,
  UnsupportedFeature,
  ResourceSteps,
  ResourceDepth,
  ResourceTimeout,
  Type,
  InvalidMatcher,
  CallableExpected,
  Format,
  GridInvariant,
  PlaceholderUnbound,
  EmptyResponse,
  Transport,
  RefinerFailure,
  InitializationFailure,
  EnsembleFailure,
  EmptyBuffer,
  OracleUnavailable,
  SessionAborted,
  Config,
  Io,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
public:
  SyntaxError(int line, int column, const std::string& msg)
      : Error(ErrorKind::Syntax,
              "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

class UnsupportedFeatureError : public Error {
public:
  UnsupportedFeatureError(std::string feature, int line)
      : Error(ErrorKind::UnsupportedFeature,
              "unsupported feature '" + feature + "' at line " + std::to_string(line)),
        feature_(std::move(feature)),
        line_(line) {}
  const std::string& feature() const { return feature_; }
  int line() const { return line_; }

private:
  std::string feature_;
  int line_;
};

class ResourceExhausted : public Error {
public:
  enum class What { Steps, Depth, Timeout };
  ResourceExhausted(What what, std::string msg)
      : Error(what == What::Steps    ? ErrorKind::ResourceSteps
              : what == What::Depth  ? ErrorKind::ResourceDepth
                                     : ErrorKind::ResourceTimeout,
              std::move(msg)),
        what_(what) {}
  What resource() const { return what_; }
  const char* resource_name() const {
    switch (what_) {
      case What::Steps: return "steps";
      case What::Depth: return "depth";
      case What::Timeout: return "timeout";
    }
    return "steps";
  }

private:
  What what_;
};

class TypeError : public Error {
public:
  TypeError(std::string goal, std::string culprit)
      : Error(ErrorKind::Type, "type error in " + goal + ": " + culprit),
        goal_(std::move(goal)),
        culprit_(std::move(culprit)) {}
  const std::string& goal() const { return goal_; }
  const std::string& culprit() const { return culprit_; }

private:
  std::string goal_;
  std::string culprit_;
};

}  // namespace abpr
