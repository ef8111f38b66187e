#include <doctest.h>

#include <cmath>
#include <random>

#include "creepdb/error.hpp"
#include "creepdb/formula/equation.hpp"
#include "creepdb/formula/expression.hpp"
#include "creepdb/formula/units.hpp"
#include "support/mutations.hpp"

using namespace creepdb;
using namespace creepdb::formula;

namespace {

Expression sym(const char* s) { return Expression::symbol(s); }
Expression num(double v) { return Expression::constant(v); }

std::size_t parse_error_position(std::string_view text) {
  try {
    parse_expression(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  FAIL("expected ParseError for '" << text << "'");
  return 0;
}

std::vector<SymbolBinding> norton_bindings() {
  return {
      SymbolBinding::make("eps", Role::Strain, "1"),
      SymbolBinding::make("t", Role::Time, "s"),
      SymbolBinding::make("A", Role::Parameter, "MPa^-n/s"),
      SymbolBinding::make("sigma", Role::Stress, "MPa"),
      SymbolBinding::make("n", Role::Parameter, "1"),
      SymbolBinding::make("Q", Role::ActivationEnergy, "J/mol"),
      SymbolBinding::make("R", Role::GasConstant, "J/(mol*K)"),
      SymbolBinding::make("T", Role::Temperature, "K"),
  };
}

}  // namespace

TEST_CASE("parse: Norton rate expression has the documented structure") {
  Expression e = parse_expression("A*sigma^n*exp(-Q/(R*T))");
  Expression expected =
      (sym("A") * pow(sym("sigma"), sym("n"))) *
      Expression::func("exp", Expression::neg(sym("Q") / (sym("R") * sym("T"))));
  CHECK(e == expected);
}

TEST_CASE("parse: derivative notation") {
  CHECK(parse_expression("d(eps)/d(t)") == Expression::derivative("eps", "t", 1));
  CHECK(parse_expression("d^2(x)/d(t)^2") == Expression::derivative("x", "t", 2));
  // a bare 'd' stays an ordinary symbol
  CHECK(parse_expression("d^2") == pow(sym("d"), num(2)));
  CHECK(parse_expression("a/d(x)/d(t)") == sym("a") / Expression::derivative("x", "t"));
}

TEST_CASE("parse: errors carry positions") {
  CHECK(parse_error_position("1 + ") == 4);
  CHECK(parse_error_position("2x") == 1);          // implicit multiplication
  CHECK(parse_error_position("2 (x)") == 2);
  CHECK(parse_error_position("foo(x)") == 0);      // unknown function
  CHECK(parse_error_position("exp(x, y)") == 5);
  CHECK(parse_error_position("d^2(x)/d(t)^3") == 12);
  CHECK_THROWS_AS(parse_expression(""), ParseError);
}

TEST_CASE("parse: depth limit") {
  std::string deep;
  for (int i = 0; i < 70; ++i) deep += "(";
  deep += "x";
  for (int i = 0; i < 70; ++i) deep += ")";
  CHECK_THROWS_AS(parse_expression(deep), ParseError);
  std::string ok;
  for (int i = 0; i < 20; ++i) ok += "(";
  ok += "x";
  for (int i = 0; i < 20; ++i) ok += ")";
  CHECK(parse_expression(ok) == sym("x"));
}

namespace {

Expression random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 9);
  static const char* names[] = {"a", "b", "sigma", "t", "n"};
  if (depth <= 1) {
    if (pick(rng) < 3) return num(std::uniform_int_distribution<int>(0, 40)(rng) * 0.25);
    return sym(names[std::uniform_int_distribution<int>(0, 4)(rng)]);
  }
  switch (pick(rng)) {
    case 0: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 1: return random_tree(rng, depth - 1) - random_tree(rng, depth - 1);
    case 2: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 3: return random_tree(rng, depth - 1) / random_tree(rng, depth - 1);
    case 4: return pow(random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    case 5: return Expression::neg(random_tree(rng, depth - 1));
    case 6: {
      auto f = kFunctions[std::uniform_int_distribution<std::size_t>(0, 6)(rng)];
      return Expression::func(std::string(f), random_tree(rng, depth - 1));
    }
    case 7: return Expression::derivative("eps", "t", std::uniform_int_distribution<int>(1, 3)(rng));
    default: return random_tree(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("render/parse round trip on a generated corpus") {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 2000; ++i) {
    Expression e = random_tree(rng, 1 + i % 6);
    std::string text = render(e);
    INFO(text);
    Expression back = parse_expression(text);
    CHECK(back == e);
    CHECK(render(back) == text);
  }
}

TEST_CASE("evaluate and differentiate") {
  Env env{{"x", 2.0}, {"y", 3.0}};
  CHECK(evaluate(parse_expression("x^2*y - ln(y) + exp(0)"), env) ==
        doctest::Approx(12.0 - std::log(3.0) + 1.0));
  CHECK_THROWS_AS(evaluate(parse_expression("x + k"), env), Error);

  // symbolic derivative against central differences
  Expression f = parse_expression("x^y*sin(x) + cosh(x/y) - log10(x*y)");
  for (const char* s : {"x", "y"}) {
    Expression df = differentiate(f, s);
    double h = 1e-6;
    Env up = env, dn = env;
    up[s] += h;
    dn[s] -= h;
    double fd = (evaluate(f, up) - evaluate(f, dn)) / (2 * h);
    CHECK(evaluate(df, env) == doctest::Approx(fd).epsilon(1e-7));
  }
  CompiledExpression compiled(f, {"x", "y"});
  double slots[] = {2.0, 3.0};
  CHECK(compiled(slots) == doctest::Approx(evaluate(f, env)));
}

TEST_CASE("infer_dimension examples") {
  std::vector<SymbolBinding> b = {
      SymbolBinding::make("sigma", Role::Stress, "MPa"),
      SymbolBinding::make("E", Role::Parameter, "MPa"),
      SymbolBinding::make("Q", Role::ActivationEnergy, "J/mol"),
      SymbolBinding::make("R", Role::GasConstant, "J/(mol*K)"),
      SymbolBinding::make("T", Role::Temperature, "K"),
      SymbolBinding::make("t", Role::Time, "s"),
  };
  CHECK(infer_dimension(parse_expression("sigma/E"), b).dimensionless());
  CHECK(infer_dimension(parse_expression("exp(-Q/(R*T))"), b).dimensionless());
  CHECK(infer_dimension(parse_expression("Q/(R*T)"), b).dimensionless());
  try {
    infer_dimension(parse_expression("sigma + t"), b);
    FAIL("expected mismatch");
  } catch (const DimensionError& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    CHECK(e.location() == "expr");
    CHECK(e.subtree() == "sigma + t");
  }
  try {
    infer_dimension(parse_expression("E*exp(Q/R)"), b);
    FAIL("expected non-dimensionless argument");
  } catch (const DimensionError& e) {
    CHECK(e.code() == ErrorCode::NonDimensionlessArgument);
    CHECK(e.location() == "expr/mul[1]");
  }
  CHECK(infer_dimension(parse_expression("d^2(sigma)/d(t)^2"), b) == Dimension::of(-1, 1, -4));
}

TEST_CASE("check_homogeneity examples") {
  Equation norton = make_equation("d(eps)/d(t) = A*sigma^n*exp(-Q/(R*T))", norton_bindings());
  auto report = check_homogeneity(norton);
  CHECK(report.pass);
  REQUIRE(report.lhs_dim.has_value());
  CHECK(*report.lhs_dim == Dimension::of(0, 0, -1));
  CHECK(*report.rhs_dim == Dimension::of(0, 0, -1));

  std::vector<SymbolBinding> hooke = {SymbolBinding::make("eps", Role::Strain, "1"),
                                      SymbolBinding::make("sigma", Role::Stress, "MPa"),
                                      SymbolBinding::make("E", Role::Parameter, "GPa"),
                                      SymbolBinding::make("t", Role::Time, "s")};
  CHECK(check_homogeneity(make_equation("eps = sigma/E", hooke)).pass);

  auto bad = check_homogeneity(make_equation("eps = sigma*t", hooke));
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.failures.size() == 1);
  CHECK(bad.failures[0].code == "DimensionMismatch");
  CHECK(bad.rhs_dim->str() == "m^-1*kg*s^-1");

  auto unbound = check_homogeneity(make_equation("eps = k*t", hooke));
  CHECK_FALSE(unbound.pass);
  CHECK(unbound.failures[0].code == "UnboundSymbol");

  CHECK_THROWS(make_equation("eps = t", {SymbolBinding::make("t", Role::Time, "s"),
                                         SymbolBinding::make("t", Role::Time, "h")}));
}

TEST_CASE("standardize examples") {
  CHECK(standardize(600, "°C").value == doctest::Approx(873.15).epsilon(1e-15));
  CHECK(standardize(600, "°C").unit == "K");
  CHECK(std::abs(standardize(1.0, "ksi").value - 6.894757) < 1e-6);
  CHECK(standardize(1.0, "ksi").unit == "MPa");
  CHECK(standardize(2.5, "%strain").value == doctest::Approx(0.025));
  CHECK(standardize(2.5, "%strain").unit == "1");
  CHECK(standardize(2, "h").value == 7200.0);
  CHECK(standardize(250, "kJ/mol").value == doctest::Approx(250000.0));
  CHECK(standardize(1.0, "N/mm^2").value == doctest::Approx(1.0));
  CHECK(standardize(32, "degF").value == doctest::Approx(273.15));
  // A in MPa^-n/s keeps its value; in Pa^-n/h it rescales by 1e6^n/3600
  CHECK(standardize(2e-10, "MPa^-n/s", {{"n", 4.0}}).value == doctest::Approx(2e-10));
  CHECK(standardize(1.0, "Pa^-n/h", {{"n", 2.0}}).value == doctest::Approx(1e12 / 3600.0));
  CHECK_THROWS_AS(standardize(1.0, "furlong"), Error);
  try {
    standardize(1.0, "bogus/s");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownUnit);
  }
}

TEST_CASE("parse_quantity strips condition prefixes") {
  auto q = parse_quantity("sigma = 31.6 MPa");
  CHECK(q.value == 31.6);
  CHECK(q.unit == "MPa");
  CHECK(parse_quantity("600 C").unit == "C");
  CHECK_THROWS(parse_quantity("MPa"));
}

TEST_CASE("unit table is versioned and covers canonical tags") {
  auto table = unit_table_json();
  CHECK(table["version"] == kUnitTableVersion);
  bool has_mpa = false;
  for (const auto& row : table["units"])
    if (row["tag"] == "MPa") has_mpa = row["canonical"] == "MPa";
  CHECK(has_mpa);
}

TEST_CASE("homogeneity verdict is invariant under unit standardization") {
  // Same equations with bindings in non-canonical units of identical dimension.
  const char* stress_units[] = {"MPa", "ksi", "Pa", "GPa"};
  const char* time_units[] = {"s", "h", "min", "day"};
  const char* temp_units[] = {"K", "degC", "degF"};
  const char* equations[] = {"d(eps)/d(t) = A*sigma^n*exp(-Q/(R*T))", "eps = sigma*t",
                             "eps = A*sigma^n*t", "d(eps)/d(t) = A*sigma^n"};
  for (const char* text : equations) {
    bool verdict = check_homogeneity(make_equation(text, norton_bindings())).pass;
    for (auto su : stress_units)
      for (auto tu : time_units) {
        std::vector<SymbolBinding> b = norton_bindings();
        b[1] = SymbolBinding::make("t", Role::Time, tu);
        b[3] = SymbolBinding::make("sigma", Role::Stress, su);
        b[2] = SymbolBinding::make("A", Role::Parameter, std::string(su) + "^-n/" + tu);
        for (auto te : temp_units) {
          if (std::string(te) != "K") continue;  // affine units are ingest-only
          b[7] = SymbolBinding::make("T", Role::Temperature, te);
        }
        CHECK(check_homogeneity(make_equation(text, b)).pass == verdict);
      }
  }
}

namespace {

struct Sym {
  const char* name;
  Dimension dim;
};

// Generates well-typed-or-not expressions over dimensional symbols.
Expression random_physical(std::mt19937_64& rng, int depth, const std::vector<Sym>& syms) {
  std::uniform_int_distribution<int> pick(0, 7);
  if (depth <= 1 || pick(rng) == 0) {
    if (pick(rng) == 0) return num(1.0 + std::uniform_int_distribution<int>(0, 8)(rng) * 0.5);
    return sym(syms[std::uniform_int_distribution<std::size_t>(0, syms.size() - 1)(rng)].name);
  }
  static const double exps[] = {2.0, 3.0, 0.5, -1.0, 1.0 / 3.0};
  switch (pick(rng)) {
    case 1: return random_physical(rng, depth - 1, syms) + random_physical(rng, depth - 1, syms);
    case 2: return random_physical(rng, depth - 1, syms) * random_physical(rng, depth - 1, syms);
    case 3: return random_physical(rng, depth - 1, syms) / random_physical(rng, depth - 1, syms);
    case 4:
      return pow(random_physical(rng, depth - 1, syms),
                 num(exps[std::uniform_int_distribution<int>(0, 4)(rng)]));
    case 5: return pow(random_physical(rng, depth - 1, syms), sym("n"));
    case 6: return Expression::func("exp", random_physical(rng, depth - 1, syms) /
                                               random_physical(rng, depth - 1, syms));
    default: return random_physical(rng, depth - 1, syms) - random_physical(rng, depth - 1, syms);
  }
}

}  // namespace

TEST_CASE("infer_dimension predicts numeric scaling under a change of base units") {
  const std::vector<Sym> syms = {{"L", Dimension::of(1, 0, 0)},
                                 {"L2", Dimension::of(1, 0, 0)},
                                 {"tau", Dimension::of(0, 0, 1)},
                                 {"sigma", Dimension::of(-1, 1, -2)},
                                 {"theta", Dimension::of(0, 0, 0, 1)},
                                 {"k", Dimension{}}};
  std::vector<SymbolBinding> bindings;
  for (const auto& s : syms) bindings.push_back(SymbolBinding{s.name, Role::Other, "", s.dim});
  bindings.push_back(SymbolBinding{"n", Role::Parameter, "1", Dimension{}});

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> value(0.5, 2.0);
  std::uniform_real_distribution<double> scale(0.5, 3.0);
  int checked = 0;
  for (int trial = 0; trial < 4000 && checked < 300; ++trial) {
    Expression e = random_physical(rng, 1 + trial % 6, syms);
    Dimension predicted;
    try {
      predicted = infer_dimension(e, bindings);
    } catch (const DimensionError&) {
      continue;
    }
    Env base{{"n", value(rng)}};
    for (const auto& s : syms) base[s.name] = value(rng);
    double lambda[kBaseCount];
    for (auto& l : lambda) l = scale(rng);
    std::map<std::string, double> exponent_values{{"n", base["n"]}};

    Env scaled = base;
    for (const auto& s : syms) {
      double f = 1.0;
      for (std::size_t i = 0; i < kBaseCount; ++i)
        f *= std::pow(lambda[i], *s.dim.at(i).evaluate(exponent_values));
      scaled[s.name] = base[s.name] * f;
    }
    double v0 = evaluate(e, base);
    double v1 = evaluate(e, scaled);
    if (!std::isfinite(v0) || !std::isfinite(v1) || std::abs(v0) < 1e-200 ||
        std::abs(v0) > 1e200)
      continue;
    double expected = 1.0;
    for (std::size_t i = 0; i < kBaseCount; ++i)
      expected *= std::pow(lambda[i], *predicted.at(i).evaluate(exponent_values));
    INFO(render(e));
    CHECK(v1 / v0 == doctest::Approx(expected).epsilon(1e-8));
    ++checked;
  }
  CHECK(checked >= 300);
}

TEST_CASE("single mutations of catalog laws fail with a located error") {
  auto mutations = testsupport::homogeneity_mutations();
  REQUIRE(mutations.size() == 20);
  for (const auto& m : mutations) {
    CAPTURE(m.model);
    CAPTURE(m.description);
    auto report = check_homogeneity(m.equation);
    CHECK_FALSE(report.pass);
    REQUIRE_FALSE(report.failures.empty());
    CHECK_FALSE(report.failures[0].location.empty());
    CHECK_FALSE(report.failures[0].subtree.empty());
  }
}
