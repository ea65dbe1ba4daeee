#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace hypfol {

/// Immutable arithmetic expression over the chart coordinates x1..xn.
///
/// Grammar (highest precedence first):
///   primary := number | xK | func '(' expr ')' | '(' expr ')'
///   power   := primary ['^' unary]          (right-associative)
///   unary   := '-' unary | power
///   term    := unary {('*' | '/') unary}
///   expr    := term {('+' | '-') term}
/// Functions: sin cos exp sqrt cosh sinh tanh. There is no implicit
/// multiplication.
class Expression {
 public:
  enum class Kind { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Sqrt, Cosh, Sinh, Tanh };

  struct Node;

  Expression() = default;

  static Expression number(double v);
  static Expression variable(int index);  // zero-based
  static Expression negate(Expression a);
  static Expression binary(Kind op, Expression a, Expression b);
  static Expression call(Func f, Expression a);

  bool empty() const noexcept { return root_ == nullptr; }
  Kind kind() const;

  /// Evaluates at `x` (x[0] is x1). Throws DomainError when any
  /// intermediate result is not finite.
  double evaluate(std::span<const double> x) const;

  /// Largest variable index used, 1-based; 0 when the expression is constant.
  int max_variable() const;

  /// Canonical text that parses back to an equivalent tree.
  std::string to_string() const;

  static std::string_view func_name(Func f);

 private:
  friend Expression parse_expression(std::string_view text, int max_vars);
  explicit Expression(std::shared_ptr<const Node> n) : root_(std::move(n)) {}
  std::shared_ptr<const Node> root_;
};

/// Parses `text`. Variables must satisfy 1 <= index <= max_vars.
/// Throws ParseError (with byte offset) on syntax errors, unknown
/// identifiers, out-of-range variables, or nesting deeper than 256.
Expression parse_expression(std::string_view text, int max_vars);

inline constexpr int kMaxParseDepth = 256;

}  // namespace hypfol
