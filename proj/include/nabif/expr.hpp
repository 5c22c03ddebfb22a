#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nabif/errors.hpp"

namespace nabif::expr {

enum class Kind : std::uint8_t {
  Literal,
  VarT,
  VarX,
  VarMu,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Call,
};

enum class Fn : std::uint8_t { Exp, Log, Sin, Cos, Tanh, Abs, Sqrt };

const char* fn_name(Fn fn) noexcept;

struct Node {
  Kind kind{Kind::Literal};
  Fn fn{Fn::Exp};
  std::int32_t a{-1};  // left child / sole operand
  std::int32_t b{-1};  // right child
  double value{0.0};   // Literal payload
};

/// Arithmetic expression over the variables t, x, mu.
///
/// Grammar (documented in docs/grammar.ebnf): + - * / ^ with standard
/// precedence, ^ right-associative and binding tighter than unary minus,
/// functions exp log sin cos tanh abs sqrt, parentheses, real literals.
/// Immutable after parsing; eval() is pure and reentrant.
class Expression {
 public:
  Expression() = default;

  /// Parses `source`; throws ParseError with byte offset on malformed input.
  static Expression parse(std::string_view source);

  /// Plain IEEE evaluation. Non-finite intermediates propagate silently;
  /// use eval_checked() when they must be diagnosed.
  double eval(double t, double x, double mu) const noexcept;

  /// Like eval() but throws NonFiniteError naming the first offending
  /// subexpression (division by zero, log of a non-positive value, ...).
  double eval_checked(double t, double x, double mu) const;

  /// Pretty-prints with minimal parentheses. Reparsing the result yields a
  /// structurally identical tree.
  std::string str() const;

  bool uses_t() const noexcept { return uses_[0]; }
  bool uses_x() const noexcept { return uses_[1]; }
  bool uses_mu() const noexcept { return uses_[2]; }

  bool structurally_equal(const Expression& other) const noexcept;

  bool empty() const noexcept { return nodes_.empty(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  friend class Parser;

  double eval_node(std::int32_t i, double t, double x, double mu) const noexcept;
  double eval_node_checked(std::int32_t i, double t, double x, double mu,
                           std::string& path) const;
  void print_node(std::int32_t i, int parent_prec, bool rhs_of_nonassoc,
                  std::string& out) const;

  std::vector<Node> nodes_;
  std::int32_t root_{-1};
  bool uses_[3]{false, false, false};
};

/// x^e with an exact integer exponent by repeated multiplication
/// (sign-correct for negative bases, unlike std::pow with rounded doubles).
double ipow(double base, long long exponent) noexcept;

}  // namespace nabif::expr
