#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nabif {

enum class ParseErrorKind {
  UnexpectedToken,
  UnbalancedParenthesis,
  UnknownIdentifier,
  EmptyInput,
};

/// Raised by the expression parser. `offset` is the byte offset into the
/// source string; `expected` describes the token set that would have been
/// accepted there.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, std::string expected,
             const std::string& message)
      : std::runtime_error(message),
        kind(kind),
        offset(offset),
        expected(std::move(expected)) {}

  ParseErrorKind kind;
  std::size_t offset;
  std::string expected;
};

/// Non-finite value produced during checked expression evaluation.
/// `subexpression` is the printed form of the offending node and `path`
/// locates it inside the tree (root/a/b/...).
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(std::string subexpression, std::string path)
      : std::runtime_error("non-finite result in subexpression '" +
                           subexpression + "' at " + path),
        subexpression(std::move(subexpression)),
        path(std::move(path)) {}

  std::string subexpression;
  std::string path;
};

/// Raised when an expression is bound to a slot it does not fit
/// (e.g. a coefficient of t alone that mentions x or mu) or when a
/// field fails its construction-time validation.
class BindError : public std::runtime_error {
 public:
  explicit BindError(const std::string& message)
      : std::runtime_error(message) {}
};

enum class NumericErrorKind {
  StepFailure,
  NoConvergence,
  TailDivergence,
  StencilUnderflow,
};

class NumericError : public std::runtime_error {
 public:
  NumericError(NumericErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind(kind) {}

  NumericErrorKind kind;
};

/// Scenario / CLI configuration problem. `where` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error(where.empty() ? message : where + ": " + message),
        where(std::move(where)) {}

  std::string where;
};

/// All grid points of a parameter sweep classified identically.
class NoTransitionError : public std::runtime_error {
 public:
  explicit NoTransitionError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace nabif
