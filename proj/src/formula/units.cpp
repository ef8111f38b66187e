#include "creepdb/formula/units.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>

#include "creepdb/error.hpp"
#include "creepdb/formula/equation.hpp"
#include "creepdb/formula/expression.hpp"

namespace creepdb::formula {

namespace {

const Dimension kStress = Dimension::of(-1, 1, -2);
const Dimension kEnergy = Dimension::of(2, 1, -2);

std::vector<UnitAtom> build_atoms() {
  const Dimension none;
  const Dimension time = Dimension::of(0, 0, 1);
  const Dimension length = Dimension::of(1, 0, 0);
  const Dimension mass = Dimension::of(0, 1, 0);
  const Dimension temp = Dimension::of(0, 0, 0, 1);
  const Dimension amount = Dimension::of(0, 0, 0, 0, 1);
  const Dimension force = Dimension::of(1, 1, -2);
  constexpr double psi = 6894.757293168361;
  return {
      {"1", none, 1.0, 0.0, {}},
      {"percent", none, 0.01, 0.0, {"%", "%strain", "pct"}},
      {"rad", none, 1.0, 0.0, {}},
      {"K", temp, 1.0, 0.0, {}},
      {"degC", temp, 1.0, 273.15, {"°C", "C", "celsius"}},
      {"degF", temp, 5.0 / 9.0, 273.15 - 32.0 * 5.0 / 9.0, {"°F", "F"}},
      {"s", time, 1.0, 0.0, {"sec"}},
      {"ms", time, 1e-3, 0.0, {}},
      {"min", time, 60.0, 0.0, {}},
      {"h", time, 3600.0, 0.0, {"hr", "hour"}},
      {"day", time, 86400.0, 0.0, {"d"}},
      {"yr", time, 3.15576e7, 0.0, {"year"}},
      {"m", length, 1.0, 0.0, {}},
      {"cm", length, 1e-2, 0.0, {}},
      {"mm", length, 1e-3, 0.0, {}},
      {"um", length, 1e-6, 0.0, {"μm", "micron"}},
      {"nm", length, 1e-9, 0.0, {}},
      {"kg", mass, 1.0, 0.0, {}},
      {"g", mass, 1e-3, 0.0, {}},
      {"mol", amount, 1.0, 0.0, {}},
      {"kmol", amount, 1e3, 0.0, {}},
      {"N", force, 1.0, 0.0, {}},
      {"kN", force, 1e3, 0.0, {}},
      {"Pa", kStress, 1.0, 0.0, {}},
      {"kPa", kStress, 1e3, 0.0, {}},
      {"MPa", kStress, 1e6, 0.0, {"N/mm^2"}},
      {"GPa", kStress, 1e9, 0.0, {}},
      {"bar", kStress, 1e5, 0.0, {}},
      {"psi", kStress, psi, 0.0, {}},
      {"ksi", kStress, psi * 1e3, 0.0, {}},
      {"J", kEnergy, 1.0, 0.0, {}},
      {"kJ", kEnergy, 1e3, 0.0, {}},
      {"cal", kEnergy, 4.184, 0.0, {}},
      {"kcal", kEnergy, 4184.0, 0.0, {}},
      {"eV", kEnergy, 1.602176634e-19, 0.0, {}},
  };
}

const UnitAtom* find_atom(std::string_view tag) {
  for (const auto& a : unit_atoms()) {
    if (a.tag == tag) return &a;
    for (const auto& alias : a.aliases)
      if (alias == tag) return &a;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size()))
    s.replace(p, from.size(), to);
  return s;
}

struct Partial {
  Dimension dim;
  double factor = 1.0;
  std::map<std::string, double> log_terms;
};

Partial reduce(const Expression& e, std::string_view tag) {
  switch (e.op()) {
    case Op::Constant: {
      require(e.value() > 0, "unit constants must be positive");
      return Partial{Dimension{}, e.value(), {}};
    }
    case Op::Symbol: {
      const UnitAtom* atom = find_atom(e.name());
      if (!atom) fail(ErrorCode::UnknownUnit, std::string(tag));
      if (atom->offset != 0.0)
        fail(ErrorCode::UnknownUnit, "affine unit '" + atom->tag + "' cannot be combined");
      return Partial{atom->dimension, atom->factor, {}};
    }
    case Op::Mul:
    case Op::Div: {
      Partial a = reduce(e.child(0), tag);
      Partial b = reduce(e.child(1), tag);
      double sign = e.op() == Op::Mul ? 1.0 : -1.0;
      Partial out{e.op() == Op::Mul ? a.dim * b.dim : a.dim / b.dim,
                  e.op() == Op::Mul ? a.factor * b.factor : a.factor / b.factor, a.log_terms};
      for (const auto& [s, k] : b.log_terms) out.log_terms[s] += sign * k;
      return out;
    }
    case Op::Pow: {
      Partial base = reduce(e.child(0), tag);
      auto power = affine_exponent(e.child(1));
      if (!power) fail(ErrorCode::UnknownUnit, std::string(tag) + " (unsupported exponent)");
      auto dim = base.dim.pow(*power);
      if (!dim || !base.log_terms.empty())
        fail(ErrorCode::UnknownUnit, std::string(tag) + " (nested symbolic exponent)");
      Partial out{*dim, std::pow(base.factor, power->constant().to_double()), {}};
      for (const auto& [s, k] : power->terms())
        out.log_terms[s] = std::log(base.factor) * k.to_double();
      return out;
    }
    default: fail(ErrorCode::UnknownUnit, std::string(tag));
  }
}

}  // namespace

const std::vector<UnitAtom>& unit_atoms() {
  static const std::vector<UnitAtom> atoms = build_atoms();
  return atoms;
}

double Unit::si_factor(const std::map<std::string, double>& exponent_values) const {
  double lf = 0.0;
  for (const auto& [s, k] : log_terms) {
    auto it = exponent_values.find(s);
    require(it != exponent_values.end(),
            "unit '" + tag + "' needs a value for exponent symbol '" + s + "'");
    lf += k * it->second;
  }
  return lf == 0.0 ? factor : factor * std::exp(lf);
}

Unit parse_unit(std::string_view raw) {
  std::string tag = trim(raw);
  if (tag.empty()) fail(ErrorCode::UnknownUnit, "(empty)");
  if (const UnitAtom* atom = find_atom(tag)) {
    return Unit{tag, atom->dimension, atom->factor, {}, atom->offset};
  }
  std::string text = replace_all(replace_all(tag, "μ", "u"), "·", "*");
  Expression expr;
  try {
    expr = parse_expression(text);
  } catch (const ParseError&) {
    fail(ErrorCode::UnknownUnit, tag);
  }
  Partial p = reduce(expr, tag);
  return Unit{tag, p.dim, p.factor, p.log_terms, 0.0};
}

Dimension unit_dimension(std::string_view tag) { return parse_unit(tag).dimension; }

bool is_known_unit(std::string_view tag) {
  try {
    parse_unit(tag);
    return true;
  } catch (const Error&) {
    return false;
  }
}

namespace {

// Stress-bearing dimensions carry mass^k * length^-k; their canonical unit
// counts stress in MPa. Returns k when that pattern holds.
std::optional<Exponent> stress_power(const Dimension& dim) {
  const Exponent& mass = dim[BaseDimension::Mass];
  const Exponent& length = dim[BaseDimension::Length];
  if (mass.is_zero() || !(mass + length).is_zero()) return std::nullopt;
  return mass;
}

}  // namespace

std::string canonical_tag(const Dimension& dim) {
  if (dim.dimensionless()) return "1";
  if (dim == Dimension::of(0, 0, 0, 1)) return "K";
  if (dim == Dimension::of(0, 0, 1)) return "s";
  if (dim == kStress) return "MPa";
  if (auto k = stress_power(dim)) {
    auto stress = kStress.pow(*k);
    if (stress) {
      Dimension rest = dim / *stress;
      std::string e = k->str();
      std::string out = *k == Exponent(Rational(1)) ? "MPa" : "MPa^(" + e + ")";
      if (!rest.dimensionless()) out += "*" + rest.str();
      return out;
    }
  }
  return dim.str();
}

Quantity standardize(double value, std::string_view tag,
                     const std::map<std::string, double>& exponent_values) {
  Unit u = parse_unit(tag);
  double si = value * u.si_factor(exponent_values) + u.offset;
  double canonical = si;
  if (auto k = stress_power(u.dimension)) {
    auto power = k->evaluate(exponent_values);
    require(power.has_value(), "unit '" + u.tag + "' needs exponent values to standardize");
    canonical = si / std::pow(1e6, *power);
  }
  return Quantity{canonical, canonical_tag(u.dimension)};
}

Quantity parse_quantity(std::string_view raw) {
  std::string text = trim(raw);
  if (auto eq = text.find('='); eq != std::string::npos) text = trim(text.substr(eq + 1));
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc()) fail(ErrorCode::UnknownUnit, "no numeric value in '" + text + "'");
  std::string unit = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (unit.empty()) unit = "1";
  parse_unit(unit);
  return Quantity{value, unit};
}

nlohmann::json unit_table_json() {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : unit_atoms()) {
    nlohmann::json dim = nlohmann::json::object();
    for (std::size_t i = 0; i < kBaseCount; ++i)
      dim[kBaseNames[i]] = a.dimension.at(i).constant().to_double();
    rows.push_back({{"tag", a.tag},
                    {"aliases", a.aliases},
                    {"dimension", dim},
                    {"factor_to_si", a.factor},
                    {"offset_to_si", a.offset},
                    {"canonical", canonical_tag(a.dimension)}});
  }
  return {{"version", kUnitTableVersion}, {"units", rows}};
}

}  // namespace creepdb::formula
