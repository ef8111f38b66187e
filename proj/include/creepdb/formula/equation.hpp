#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/formula/dimension.hpp"
#include "creepdb/formula/expression.hpp"

namespace creepdb::formula {

/// Physical role of a symbol in a constitutive law.
enum class Role {
  Strain,
  Stress,
  Time,
  Temperature,
  ActivationEnergy,
  GasConstant,
  Parameter,
  Other,
};

std::string_view to_string(Role role);
Role role_from_string(std::string_view text);

struct SymbolBinding {
  std::string name;
  Role role = Role::Other;
  std::string unit;
  Dimension dimension;

  /// Derives the dimension from `unit`; throws UnknownUnit.
  static SymbolBinding make(std::string name, Role role, std::string unit);
};

struct Equation {
  Expression lhs;
  Expression rhs;
  std::vector<SymbolBinding> bindings;

  const SymbolBinding* find(std::string_view symbol) const;
  std::string str() const;
};

/// Parses "lhs = rhs". Throws ParseError.
std::pair<Expression, Expression> parse_equation_sides(std::string_view text);

/// Parses and attaches bindings. Throws ParseError, or Precondition when a
/// symbol is bound twice.
Equation make_equation(std::string_view text, std::vector<SymbolBinding> bindings);

/// Reduces an exponent expression (constants, symbols, + - and constant
/// scaling) to an affine form; nullopt otherwise.
std::optional<Exponent> affine_exponent(const Expression& expr);

using DimensionBindings = std::vector<SymbolBinding>;

/// Throws DimensionError (DimensionMismatch, NonDimensionlessArgument,
/// UnboundSymbol) naming the offending subtree. `root` prefixes locations.
Dimension infer_dimension(const Expression& expr, const DimensionBindings& bindings,
                          const std::string& root = "expr");

struct HomogeneityFailure {
  std::string code;
  std::string location;
  std::string subtree;
  std::string message;
};

struct HomogeneityReport {
  bool pass = false;
  std::optional<Dimension> lhs_dim;
  std::optional<Dimension> rhs_dim;
  std::vector<HomogeneityFailure> failures;

  nlohmann::json to_json() const;
};

HomogeneityReport check_homogeneity(const Equation& eq);

}  // namespace creepdb::formula
