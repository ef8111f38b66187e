#include "creepdb/formula/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "creepdb/error.hpp"

namespace creepdb::formula {

bool is_known_function(std::string_view name) {
  return std::find(std::begin(kFunctions), std::end(kFunctions), name) != std::end(kFunctions);
}

// ---------------------------------------------------------------------------
// Expression

Expression Expression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = value;
  return Expression(std::move(n));
}

Expression Expression::symbol(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Symbol;
  n->name = std::move(name);
  return Expression(std::move(n));
}

Expression Expression::binary(Op op, Expression lhs, Expression rhs) {
  require(op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div || op == Op::Pow,
          "binary() needs an arithmetic operator");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->children = {std::move(lhs), std::move(rhs)};
  return Expression(std::move(n));
}

Expression Expression::neg(Expression child) {
  auto n = std::make_shared<Node>();
  n->op = Op::Neg;
  n->children = {std::move(child)};
  return Expression(std::move(n));
}

Expression Expression::func(std::string name, Expression arg) {
  require(is_known_function(name), "unknown function '" + name + "'");
  auto n = std::make_shared<Node>();
  n->op = Op::Func;
  n->name = std::move(name);
  n->children = {std::move(arg)};
  return Expression(std::move(n));
}

Expression Expression::derivative(std::string target, std::string wrt, int order) {
  require(order >= 1, "derivative order must be >= 1");
  auto n = std::make_shared<Node>();
  n->op = Op::Derivative;
  n->name = std::move(target);
  n->wrt = std::move(wrt);
  n->order = order;
  return Expression(std::move(n));
}

Op Expression::op() const {
  require(node_ != nullptr, "empty expression");
  return node_->op;
}
double Expression::value() const { return node_->value; }
const std::string& Expression::name() const { return node_->name; }
const std::string& Expression::wrt() const { return node_->wrt; }
int Expression::order() const { return node_->order; }
const std::vector<Expression>& Expression::children() const { return node_->children; }

int Expression::depth() const {
  if (!node_) return 0;
  int d = 0;
  for (const auto& c : node_->children) d = std::max(d, c.depth());
  return d + 1;
}

bool operator==(const Expression& a, const Expression& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.op != y.op || x.children.size() != y.children.size()) return false;
  switch (x.op) {
    case Op::Constant:
      if (x.value != y.value) return false;
      break;
    case Op::Symbol:
    case Op::Func:
      if (x.name != y.name) return false;
      break;
    case Op::Derivative:
      if (x.name != y.name || x.wrt != y.wrt || x.order != y.order) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < x.children.size(); ++i)
    if (!(x.children[i] == y.children[i])) return false;
  return true;
}

Expression operator+(Expression a, Expression b) { return Expression::binary(Op::Add, a, b); }
Expression operator-(Expression a, Expression b) { return Expression::binary(Op::Sub, a, b); }
Expression operator*(Expression a, Expression b) { return Expression::binary(Op::Mul, a, b); }
Expression operator/(Expression a, Expression b) { return Expression::binary(Op::Div, a, b); }
Expression pow(Expression base, Expression exponent) {
  return Expression::binary(Op::Pow, base, exponent);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expression parse() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "empty expression");
    Expression e = parse_sum();
    skip_space();
    if (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '(' || c == '_' || c == '.')
        throw ParseError(pos_, "implicit multiplication is not allowed");
      throw ParseError(pos_, std::string("unexpected '") + c + "'");
    }
    if (e.depth() > kMaxDepth) throw ParseError(0, "expression deeper than 64 levels");
    return e;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) throw ParseError(p.pos_, "expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, std::string("expected '") + c + "'");
    if (text_[pos_] != c)
      throw ParseError(pos_, std::string("expected '") + c + "' but found '" + text_[pos_] + "'");
    ++pos_;
  }

  Expression parse_sum() {
    Expression lhs = parse_signed();
    for (;;) {
      if (accept('+'))
        lhs = Expression::binary(Op::Add, lhs, parse_product());
      else if (accept('-'))
        lhs = Expression::binary(Op::Sub, lhs, parse_product());
      else
        return lhs;
    }
  }

  // A leading minus negates the whole product: -Q/(R*T) is -(Q/(R*T)).
  Expression parse_signed() {
    if (accept('-')) {
      DepthGuard guard(*this);
      return Expression::neg(parse_signed());
    }
    return parse_product();
  }

  Expression parse_product() {
    Expression lhs = parse_factor();
    for (;;) {
      if (accept('*'))
        lhs = Expression::binary(Op::Mul, lhs, parse_factor());
      else if (accept('/'))
        lhs = Expression::binary(Op::Div, lhs, parse_factor());
      else
        return lhs;
    }
  }

  Expression parse_factor() {
    if (accept('-')) {
      DepthGuard guard(*this);
      return Expression::neg(parse_factor());
    }
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (accept('^')) {
      DepthGuard guard(*this);
      return Expression::binary(Op::Pow, base, parse_factor());
    }
    return base;
  }

  std::string parse_identifier() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ >= text_.size() ||
        !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      throw ParseError(pos_, "expected identifier");
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  int parse_small_int() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError(pos_, "expected derivative order");
    int value = 0;
    std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (value < 1 || value > 9) throw ParseError(start, "derivative order out of range");
    return value;
  }

  bool derivative_ahead() const {
    // "d(" or "d^<digits>(" introduces a derivative; plain "d" is a symbol.
    std::size_t p = pos_ + 1;
    auto skip = [&] {
      while (p < text_.size() && std::isspace(static_cast<unsigned char>(text_[p]))) ++p;
    };
    skip();
    if (p < text_.size() && text_[p] == '(') return true;
    if (p >= text_.size() || text_[p] != '^') return false;
    ++p;
    skip();
    std::size_t digits = p;
    while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
    if (p == digits) return false;
    skip();
    return p < text_.size() && text_[p] == '(';
  }

  Expression parse_derivative() {
    ++pos_;  // 'd'
    int order = 1;
    if (accept('^')) order = parse_small_int();
    expect('(');
    std::string target = parse_identifier();
    expect(')');
    expect('/');
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != 'd') throw ParseError(pos_, "expected 'd('");
    ++pos_;
    expect('(');
    std::string wrt = parse_identifier();
    expect(')');
    if (order > 1) {
      expect('^');
      std::size_t at = pos_;
      if (parse_small_int() != order) throw ParseError(at, "derivative orders differ");
    }
    return Expression::derivative(std::move(target), std::move(wrt), order);
  }

  Expression parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || end != text_.data() + pos_)
      throw ParseError(start, "malformed number");
    return Expression::constant(value);
  }

  Expression parse_primary() {
    DepthGuard guard(*this);
    skip_space();
    if (pos_ >= text_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression inner = parse_sum();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      if (c == 'd' && derivative_ahead()) {
        std::size_t after = pos_ + 1;
        if (after >= text_.size() ||
            !(std::isalnum(static_cast<unsigned char>(text_[after])) || text_[after] == '_'))
          return parse_derivative();
      }
      std::size_t at = pos_;
      std::string id = parse_identifier();
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        if (!is_known_function(id)) throw ParseError(at, "unknown function '" + id + "'");
        ++pos_;
        Expression arg = parse_sum();
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ',')
          throw ParseError(pos_, "functions take exactly one argument");
        expect(')');
        return Expression::func(std::move(id), std::move(arg));
      }
      return Expression::symbol(std::move(id));
    }
    throw ParseError(pos_, std::string("unexpected '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

int precedence(const Expression& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Pow:
    case Op::Derivative: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void render_into(const Expression& e, std::string& out);

// Negations are parenthesized wherever the grammar would otherwise bind the
// minus differently: as an operand of * / ^ and on the right of + -.
void render_operand(const Expression& e, int min_prec, std::string& out, bool allow_neg) {
  bool paren = e.op() == Op::Neg ? !allow_neg : precedence(e) < min_prec;
  if (paren) out += '(';
  render_into(e, out);
  if (paren) out += ')';
}

void render_into(const Expression& e, std::string& out) {
  switch (e.op()) {
    case Op::Constant:
      if (e.value() < 0) {
        out += '(' + format_number(e.value()) + ')';
      } else {
        out += format_number(e.value());
      }
      return;
    case Op::Symbol: out += e.name(); return;
    case Op::Add:
    case Op::Sub:
      render_operand(e.child(0), 1, out, true);
      out += e.op() == Op::Add ? " + " : " - ";
      render_operand(e.child(1), 2, out, false);
      return;
    case Op::Mul:
    case Op::Div:
      render_operand(e.child(0), 2, out, false);
      out += e.op() == Op::Mul ? "*" : "/";
      render_operand(e.child(1), 3, out, false);
      return;
    case Op::Neg:
      out += '-';
      render_operand(e.child(0), 2, out, true);
      return;
    case Op::Pow:
      render_operand(e.child(0), 5, out, false);
      out += '^';
      render_operand(e.child(1), 4, out, false);
      return;
    case Op::Func:
      out += e.name() + "(";
      render_into(e.child(0), out);
      out += ')';
      return;
    case Op::Derivative:
      if (e.order() == 1) {
        out += "d(" + e.name() + ")/d(" + e.wrt() + ")";
      } else {
        std::string k = std::to_string(e.order());
        out += "d^" + k + "(" + e.name() + ")/d(" + e.wrt() + ")^" + k;
      }
      return;
  }
}

void collect_symbols(const Expression& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::Symbol: out.insert(e.name()); break;
    case Op::Derivative:
      out.insert(e.name());
      out.insert(e.wrt());
      break;
    default:
      for (const auto& c : e.children()) collect_symbols(c, out);
  }
}

double apply_function(const std::string& name, double x) {
  if (name == "exp") return std::exp(x);
  if (name == "ln") return std::log(x);
  if (name == "log10") return std::log10(x);
  if (name == "sin") return std::sin(x);
  if (name == "cos") return std::cos(x);
  if (name == "sinh") return std::sinh(x);
  if (name == "cosh") return std::cosh(x);
  fail(ErrorCode::Precondition, "unknown function " + name);
}

bool is_const(const Expression& e, double v) { return e.op() == Op::Constant && e.value() == v; }

bool depends_on(const Expression& e, std::string_view s) {
  if (e.op() == Op::Symbol) return e.name() == s;
  if (e.op() == Op::Derivative) return e.name() == s || e.wrt() == s;
  for (const auto& c : e.children())
    if (depends_on(c, s)) return true;
  return false;
}

// Folding constructors keep derivative trees small.
Expression add(Expression a, Expression b) {
  if (is_const(a, 0)) return b;
  if (is_const(b, 0)) return a;
  if (a.op() == Op::Constant && b.op() == Op::Constant) return Expression::constant(a.value() + b.value());
  return a + b;
}
Expression sub(Expression a, Expression b) {
  if (is_const(b, 0)) return a;
  if (is_const(a, 0)) return b.op() == Op::Constant ? Expression::constant(-b.value()) : Expression::neg(b);
  if (a.op() == Op::Constant && b.op() == Op::Constant) return Expression::constant(a.value() - b.value());
  return a - b;
}
Expression mul(Expression a, Expression b) {
  if (is_const(a, 0) || is_const(b, 0)) return Expression::constant(0);
  if (is_const(a, 1)) return b;
  if (is_const(b, 1)) return a;
  if (a.op() == Op::Constant && b.op() == Op::Constant) return Expression::constant(a.value() * b.value());
  return a * b;
}
Expression div(Expression a, Expression b) {
  if (is_const(a, 0)) return Expression::constant(0);
  if (is_const(b, 1)) return a;
  return a / b;
}
Expression negate(Expression a) {
  if (a.op() == Op::Constant) return Expression::constant(-a.value());
  if (a.op() == Op::Neg) return a.child(0);
  return Expression::neg(a);
}

}  // namespace

Expression parse_expression(std::string_view text) { return Parser(text).parse(); }

std::string render(const Expression& expr) {
  std::string out;
  render_into(expr, out);
  return out;
}

std::set<std::string> symbols(const Expression& expr) {
  std::set<std::string> out;
  if (!expr.empty()) collect_symbols(expr, out);
  return out;
}

double evaluate(const Expression& e, const Env& env) {
  switch (e.op()) {
    case Op::Constant: return e.value();
    case Op::Symbol: {
      auto it = env.find(e.name());
      if (it == env.end()) fail(ErrorCode::UnboundSymbol, e.name());
      return it->second;
    }
    case Op::Add: return evaluate(e.child(0), env) + evaluate(e.child(1), env);
    case Op::Sub: return evaluate(e.child(0), env) - evaluate(e.child(1), env);
    case Op::Mul: return evaluate(e.child(0), env) * evaluate(e.child(1), env);
    case Op::Div: return evaluate(e.child(0), env) / evaluate(e.child(1), env);
    case Op::Pow: return std::pow(evaluate(e.child(0), env), evaluate(e.child(1), env));
    case Op::Neg: return -evaluate(e.child(0), env);
    case Op::Func: return apply_function(e.name(), evaluate(e.child(0), env));
    case Op::Derivative:
      fail(ErrorCode::Precondition, "cannot evaluate derivative node " + render(e));
  }
  return 0.0;
}

Expression differentiate(const Expression& e, std::string_view s) {
  if (!depends_on(e, s)) return Expression::constant(0);
  switch (e.op()) {
    case Op::Constant: return Expression::constant(0);
    case Op::Symbol: return Expression::constant(1);
    case Op::Add: return add(differentiate(e.child(0), s), differentiate(e.child(1), s));
    case Op::Sub: return sub(differentiate(e.child(0), s), differentiate(e.child(1), s));
    case Op::Mul: {
      const auto& a = e.child(0);
      const auto& b = e.child(1);
      return add(mul(differentiate(a, s), b), mul(a, differentiate(b, s)));
    }
    case Op::Div: {
      const auto& a = e.child(0);
      const auto& b = e.child(1);
      if (!depends_on(b, s)) return div(differentiate(a, s), b);
      return div(sub(mul(differentiate(a, s), b), mul(a, differentiate(b, s))),
                 pow(b, Expression::constant(2)));
    }
    case Op::Neg: return negate(differentiate(e.child(0), s));
    case Op::Pow: {
      const auto& b = e.child(0);
      const auto& x = e.child(1);
      if (!depends_on(x, s)) {
        Expression reduced = x.op() == Op::Constant ? Expression::constant(x.value() - 1)
                                                    : sub(x, Expression::constant(1));
        return mul(mul(x, pow(b, reduced)), differentiate(b, s));
      }
      // d(b^x) = b^x * (x' ln b + x b'/b)
      Expression term = mul(differentiate(x, s), Expression::func("ln", b));
      if (depends_on(b, s)) term = add(term, div(mul(x, differentiate(b, s)), b));
      return mul(e, term);
    }
    case Op::Func: {
      const auto& u = e.child(0);
      Expression du = differentiate(u, s);
      const std::string& f = e.name();
      Expression outer;
      if (f == "exp") outer = e;
      else if (f == "ln") outer = div(Expression::constant(1), u);
      else if (f == "log10") outer = div(Expression::constant(1), mul(u, Expression::constant(std::log(10.0))));
      else if (f == "sin") outer = Expression::func("cos", u);
      else if (f == "cos") outer = negate(Expression::func("sin", u));
      else if (f == "sinh") outer = Expression::func("cosh", u);
      else outer = Expression::func("sinh", u);
      return mul(outer, du);
    }
    case Op::Derivative:
      fail(ErrorCode::Precondition, "cannot differentiate derivative node " + render(e));
  }
  return Expression::constant(0);
}

Expression replace_derivatives(
    const Expression& e,
    const std::function<std::string(const std::string&, int)>& name_for) {
  switch (e.op()) {
    case Op::Derivative: return Expression::symbol(name_for(e.name(), e.order()));
    case Op::Constant:
    case Op::Symbol: return e;
    case Op::Neg: return Expression::neg(replace_derivatives(e.child(0), name_for));
    case Op::Func: return Expression::func(e.name(), replace_derivatives(e.child(0), name_for));
    default:
      return Expression::binary(e.op(), replace_derivatives(e.child(0), name_for),
                                replace_derivatives(e.child(1), name_for));
  }
}

namespace {

std::function<double(const double*)> compile_node(const Expression& e,
                                                   const std::vector<std::string>& slots) {
  using Fn = std::function<double(const double*)>;
  switch (e.op()) {
    case Op::Constant: {
      double v = e.value();
      return [v](const double*) { return v; };
    }
    case Op::Symbol: {
      auto it = std::find(slots.begin(), slots.end(), e.name());
      if (it == slots.end()) fail(ErrorCode::UnboundSymbol, e.name());
      auto idx = static_cast<std::size_t>(it - slots.begin());
      return [idx](const double* s) { return s[idx]; };
    }
    case Op::Neg: {
      Fn a = compile_node(e.child(0), slots);
      return [a](const double* s) { return -a(s); };
    }
    case Op::Func: {
      Fn a = compile_node(e.child(0), slots);
      const std::string& f = e.name();
      if (f == "exp") return [a](const double* s) { return std::exp(a(s)); };
      if (f == "ln") return [a](const double* s) { return std::log(a(s)); };
      if (f == "log10") return [a](const double* s) { return std::log10(a(s)); };
      if (f == "sin") return [a](const double* s) { return std::sin(a(s)); };
      if (f == "cos") return [a](const double* s) { return std::cos(a(s)); };
      if (f == "sinh") return [a](const double* s) { return std::sinh(a(s)); };
      return [a](const double* s) { return std::cosh(a(s)); };
    }
    case Op::Derivative:
      fail(ErrorCode::Precondition, "cannot compile derivative node " + render(e));
    default: break;
  }
  Fn a = compile_node(e.child(0), slots);
  Fn b = compile_node(e.child(1), slots);
  switch (e.op()) {
    case Op::Add: return [a, b](const double* s) { return a(s) + b(s); };
    case Op::Sub: return [a, b](const double* s) { return a(s) - b(s); };
    case Op::Mul: return [a, b](const double* s) { return a(s) * b(s); };
    case Op::Div: return [a, b](const double* s) { return a(s) / b(s); };
    default: {
      const auto& x = e.child(1);
      if (x.op() == Op::Constant && x.value() == 2.0)
        return [a](const double* s) { double v = a(s); return v * v; };
      if (x.op() == Op::Constant && x.value() == 3.0)
        return [a](const double* s) { double v = a(s); return v * v * v; };
      return [a, b](const double* s) { return std::pow(a(s), b(s)); };
    }
  }
}

}  // namespace

CompiledExpression::CompiledExpression(const Expression& expr,
                                       const std::vector<std::string>& slots)
    : fn_(compile_node(expr, slots)) {}

}  // namespace creepdb::formula
