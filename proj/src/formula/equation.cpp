#include "creepdb/formula/equation.hpp"

#include <set>

#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"

namespace creepdb::formula {

namespace {
constexpr std::pair<Role, std::string_view> kRoleNames[] = {
    {Role::Strain, "strain"},
    {Role::Stress, "stress"},
    {Role::Time, "time"},
    {Role::Temperature, "temperature"},
    {Role::ActivationEnergy, "activation_energy"},
    {Role::GasConstant, "gas_constant"},
    {Role::Parameter, "parameter"},
    {Role::Other, "other"},
};
}  // namespace

std::string_view to_string(Role role) {
  for (const auto& [r, name] : kRoleNames)
    if (r == role) return name;
  return "other";
}

Role role_from_string(std::string_view text) {
  for (const auto& [r, name] : kRoleNames)
    if (name == text) return r;
  fail(ErrorCode::Precondition, "unknown symbol role '" + std::string(text) + "'");
}

SymbolBinding SymbolBinding::make(std::string name, Role role, std::string unit) {
  Dimension dim = unit_dimension(unit);
  return SymbolBinding{std::move(name), role, std::move(unit), dim};
}

const SymbolBinding* Equation::find(std::string_view symbol) const {
  for (const auto& b : bindings)
    if (b.name == symbol) return &b;
  return nullptr;
}

std::string Equation::str() const { return render(lhs) + " = " + render(rhs); }

std::pair<Expression, Expression> parse_equation_sides(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos) throw ParseError(text.size(), "expected '='");
  if (text.find('=', eq + 1) != std::string_view::npos)
    throw ParseError(text.find('=', eq + 1), "more than one '='");
  Expression lhs;
  try {
    lhs = parse_expression(text.substr(0, eq));
  } catch (const ParseError& e) {
    throw ParseError(e.position(), "left side: malformed expression");
  }
  Expression rhs;
  try {
    rhs = parse_expression(text.substr(eq + 1));
  } catch (const ParseError& e) {
    throw ParseError(eq + 1 + e.position(), "right side: malformed expression");
  }
  return {lhs, rhs};
}

Equation make_equation(std::string_view text, std::vector<SymbolBinding> bindings) {
  std::set<std::string> seen;
  for (const auto& b : bindings)
    require(seen.insert(b.name).second, "symbol '" + b.name + "' bound more than once");
  auto [lhs, rhs] = parse_equation_sides(text);
  return Equation{lhs, rhs, std::move(bindings)};
}

std::optional<Exponent> affine_exponent(const Expression& e) {
  switch (e.op()) {
    case Op::Constant: {
      auto r = Rational::from_double(e.value());
      if (!r) return std::nullopt;
      return Exponent(*r);
    }
    case Op::Symbol: return Exponent::of_symbol(e.name());
    case Op::Neg: {
      auto a = affine_exponent(e.child(0));
      if (!a) return std::nullopt;
      return *a * Rational(-1);
    }
    case Op::Add:
    case Op::Sub: {
      auto a = affine_exponent(e.child(0));
      auto b = affine_exponent(e.child(1));
      if (!a || !b) return std::nullopt;
      return e.op() == Op::Add ? *a + *b : *a - *b;
    }
    case Op::Mul: {
      auto a = affine_exponent(e.child(0));
      auto b = affine_exponent(e.child(1));
      if (!a || !b) return std::nullopt;
      return Exponent::multiply(*a, *b);
    }
    case Op::Div: {
      auto a = affine_exponent(e.child(0));
      auto b = affine_exponent(e.child(1));
      if (!a || !b || !b->is_constant() || b->constant().is_zero()) return std::nullopt;
      const Rational& d = b->constant();
      return *a * Rational(d.den(), d.num());
    }
    default: return std::nullopt;
  }
}

namespace {

std::string segment(const Expression& e, std::size_t index) {
  std::string name;
  switch (e.op()) {
    case Op::Add: name = "add"; break;
    case Op::Sub: name = "sub"; break;
    case Op::Mul: name = "mul"; break;
    case Op::Div: name = "div"; break;
    case Op::Pow: name = "pow"; break;
    case Op::Neg: name = "neg"; break;
    case Op::Func: name = e.name(); break;
    default: name = "node"; break;
  }
  return name + "[" + std::to_string(index) + "]";
}

class Inference {
 public:
  explicit Inference(const DimensionBindings& b) : bindings_(b) {}

  Dimension infer(const Expression& e, const std::string& path) {
    switch (e.op()) {
      case Op::Constant: return Dimension{};
      case Op::Symbol: return lookup(e.name(), e, path);
      case Op::Derivative: {
        Dimension target = lookup(e.name(), e, path);
        Dimension var = lookup(e.wrt(), e, path);
        auto scaled = var.pow(Exponent(Rational(e.order())));
        return target / *scaled;
      }
      case Op::Neg: return infer(e.child(0), path + "/" + segment(e, 0));
      case Op::Func: {
        Dimension arg = infer(e.child(0), path + "/" + segment(e, 0));
        if (!arg.dimensionless())
          throw DimensionError(ErrorCode::NonDimensionlessArgument, path, render(e),
                               e.name() + "() argument has dimension " + arg.str());
        return Dimension{};
      }
      case Op::Add:
      case Op::Sub: {
        Dimension a = infer(e.child(0), path + "/" + segment(e, 0));
        Dimension b = infer(e.child(1), path + "/" + segment(e, 1));
        if (!(a == b))
          throw DimensionError(ErrorCode::DimensionMismatch, path, render(e),
                               "terms have dimensions " + a.str() + " and " + b.str());
        return a;
      }
      case Op::Mul: return infer(e.child(0), path + "/" + segment(e, 0)) *
                           infer(e.child(1), path + "/" + segment(e, 1));
      case Op::Div: return infer(e.child(0), path + "/" + segment(e, 0)) /
                           infer(e.child(1), path + "/" + segment(e, 1));
      case Op::Pow: {
        Dimension base = infer(e.child(0), path + "/" + segment(e, 0));
        Dimension exp = infer(e.child(1), path + "/" + segment(e, 1));
        if (!exp.dimensionless())
          throw DimensionError(ErrorCode::NonDimensionlessArgument, path + "/" + segment(e, 1),
                               render(e.child(1)), "exponent has dimension " + exp.str());
        if (base.dimensionless()) return base;
        auto affine = affine_exponent(e.child(1));
        if (!affine)
          throw DimensionError(ErrorCode::NonDimensionlessArgument, path, render(e),
                               "dimensional base raised to a non-rational exponent");
        auto out = base.pow(*affine);
        if (!out)
          throw DimensionError(ErrorCode::NonDimensionlessArgument, path, render(e),
                               "symbolic exponent applied to a symbolic dimension");
        return *out;
      }
    }
    return Dimension{};
  }

 private:
  Dimension lookup(const std::string& name, const Expression& e, const std::string& path) {
    for (const auto& b : bindings_)
      if (b.name == name) return b.dimension;
    throw DimensionError(ErrorCode::UnboundSymbol, path, render(e),
                         "symbol '" + name + "' has no binding");
  }

  const DimensionBindings& bindings_;
};

}  // namespace

Dimension infer_dimension(const Expression& expr, const DimensionBindings& bindings,
                          const std::string& root) {
  return Inference(bindings).infer(expr, root);
}

nlohmann::json HomogeneityReport::to_json() const {
  nlohmann::json j;
  j["pass"] = pass;
  j["lhs_dim"] = lhs_dim ? nlohmann::json(lhs_dim->str()) : nlohmann::json(nullptr);
  j["rhs_dim"] = rhs_dim ? nlohmann::json(rhs_dim->str()) : nlohmann::json(nullptr);
  j["failures"] = nlohmann::json::array();
  for (const auto& f : failures)
    j["failures"].push_back(
        {{"code", f.code}, {"location", f.location}, {"subtree", f.subtree}, {"message", f.message}});
  return j;
}

HomogeneityReport check_homogeneity(const Equation& eq) {
  HomogeneityReport report;
  auto side = [&](const Expression& e, const char* root) -> std::optional<Dimension> {
    try {
      return infer_dimension(e, eq.bindings, root);
    } catch (const DimensionError& err) {
      report.failures.push_back({std::string(to_string(err.code())), err.location(),
                                 err.subtree(), err.what()});
      return std::nullopt;
    }
  };
  report.lhs_dim = side(eq.lhs, "lhs");
  report.rhs_dim = side(eq.rhs, "rhs");
  if (report.lhs_dim && report.rhs_dim && !(*report.lhs_dim == *report.rhs_dim)) {
    report.failures.push_back({"DimensionMismatch", "=", eq.str(),
                               "sides differ: " + report.lhs_dim->str() + " vs " +
                                   report.rhs_dim->str()});
  }
  report.pass = report.failures.empty();
  return report;
}

}  // namespace creepdb::formula
