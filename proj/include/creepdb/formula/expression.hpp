#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace creepdb::formula {

enum class Op { Constant, Symbol, Add, Sub, Mul, Div, Pow, Neg, Func, Derivative };

/// Functions the grammar accepts in call position.
inline constexpr std::string_view kFunctions[] = {"exp",  "ln",   "log10", "sin",
                                                   "cos",  "sinh", "cosh"};

bool is_known_function(std::string_view name);

inline constexpr int kMaxDepth = 64;

/// Immutable expression tree. Copies share structure.
class Expression {
 public:
  struct Node;

  Expression() = default;

  static Expression constant(double value);
  static Expression symbol(std::string name);
  static Expression binary(Op op, Expression lhs, Expression rhs);
  static Expression neg(Expression child);
  static Expression func(std::string name, Expression arg);
  /// d^order(target)/d(wrt)^order
  static Expression derivative(std::string target, std::string wrt, int order = 1);

  bool empty() const noexcept { return node_ == nullptr; }
  Op op() const;
  double value() const;                 // Constant
  const std::string& name() const;      // Symbol, Func name, Derivative target
  const std::string& wrt() const;       // Derivative
  int order() const;                    // Derivative
  const std::vector<Expression>& children() const;
  const Expression& child(std::size_t i) const { return children().at(i); }

  int depth() const;

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  explicit Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expression::Node {
  Op op;
  double value = 0.0;
  std::string name;
  std::string wrt;
  int order = 0;
  std::vector<Expression> children;
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);
Expression pow(Expression base, Expression exponent);

/// Parses infix text: `+ - * / ^`, parentheses, calls to the known functions,
/// and `d(x)/d(t)` or `d^2(x)/d(t)^2` derivatives. Implicit multiplication is
/// rejected. Throws ParseError with a 0-based position.
Expression parse_expression(std::string_view text);

/// Minimal-parenthesis rendering that parses back to an identical tree.
std::string render(const Expression& expr);

/// Symbols referenced anywhere, including derivative targets and variables.
std::set<std::string> symbols(const Expression& expr);

using Env = std::map<std::string, double, std::less<>>;

/// Numeric evaluation. Throws UnboundSymbol for a missing symbol and
/// Precondition for Derivative nodes.
double evaluate(const Expression& expr, const Env& env);

/// Symbolic partial derivative with constant folding of 0/1 factors.
Expression differentiate(const Expression& expr, std::string_view symbol);

/// Replaces every derivative node `d^k(x)/d(t)^k` by the symbol returned from
/// `name_for`; used to turn an ODE into an algebraic form.
Expression replace_derivatives(
    const Expression& expr,
    const std::function<std::string(const std::string& target, int order)>& name_for);

/// Expression compiled against a fixed slot layout for repeated evaluation.
class CompiledExpression {
 public:
  CompiledExpression() = default;
  CompiledExpression(const Expression& expr, const std::vector<std::string>& slots);

  double operator()(const double* slots) const { return fn_(slots); }

 private:
  std::function<double(const double*)> fn_;
};

}  // namespace creepdb::formula
