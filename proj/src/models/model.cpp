#include "creepdb/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "creepdb/error.hpp"

namespace creepdb::models {

using formula::Expression;
using formula::Op;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::ClosedForm: return "closed_form";
    case ModelKind::RateForm: return "rate";
    case ModelKind::Ode: return "ode";
  }
  return "closed_form";
}

}  // namespace

ConstitutiveModel ConstitutiveModel::closed_form(std::string name, formula::Equation eq,
                                                 std::string strain_symbol,
                                                 std::string time_symbol,
                                                 std::vector<std::string> parameters,
                                                 std::vector<std::string> conditions,
                                                 Values constants) {
  ConstitutiveModel m;
  m.name_ = std::move(name);
  const Expression& lhs = eq.lhs;
  if (lhs.op() == Op::Symbol && lhs.name() == strain_symbol) {
    m.kind_ = ModelKind::ClosedForm;
  } else if (lhs.op() == Op::Derivative && lhs.name() == strain_symbol &&
             lhs.wrt() == time_symbol && lhs.order() == 1) {
    m.kind_ = ModelKind::RateForm;
  } else {
    fail(ErrorCode::Precondition,
         "closed-form lhs must be '" + strain_symbol + "' or its time derivative");
  }
  m.equation_ = std::move(eq);
  m.strain_ = std::move(strain_symbol);
  m.time_ = std::move(time_symbol);
  m.parameters_ = std::move(parameters);
  m.conditions_ = std::move(conditions);
  m.constants_ = std::move(constants);
  if (m.kind_ == ModelKind::RateForm) {
    m.states_ = {m.strain_};
    m.rhs_ = {m.equation_.rhs};
    m.observable_ = Expression::symbol(m.strain_);
    m.check_ode_symbols();
  } else {
    for (const auto& s : formula::symbols(m.equation_.rhs)) {
      bool known = s == m.time_ || contains(m.parameters_, s) || contains(m.conditions_, s) ||
                   m.constants_.count(s);
      require(known, "symbol '" + s + "' is not a parameter, condition, constant or time");
    }
  }
  return m;
}

ConstitutiveModel ConstitutiveModel::ode(std::string name, formula::Equation equation,
                                         std::string time_symbol, std::vector<std::string> states,
                                         std::vector<Expression> rhs,
                                         std::vector<std::string> initial, Expression observable,
                                         std::vector<std::string> parameters,
                                         std::vector<std::string> conditions, Values constants) {
  require(!states.empty() && states.size() == rhs.size(), "one right-hand side per state");
  require(initial.empty() || initial.size() == states.size(), "one initial symbol per state");
  ConstitutiveModel m;
  m.name_ = std::move(name);
  m.kind_ = ModelKind::Ode;
  m.equation_ = std::move(equation);
  m.time_ = std::move(time_symbol);
  m.states_ = std::move(states);
  m.strain_ = m.states_.front();
  m.rhs_ = std::move(rhs);
  m.optional_ = std::move(initial);
  m.observable_ = std::move(observable);
  m.parameters_ = std::move(parameters);
  m.conditions_ = std::move(conditions);
  m.constants_ = std::move(constants);
  m.check_ode_symbols();
  return m;
}

void ConstitutiveModel::check_ode_symbols() const {
  auto allowed = [&](const std::string& s) {
    return s == time_ || contains(states_, s) || contains(parameters_, s) ||
           contains(conditions_, s) || constants_.count(s) > 0;
  };
  for (const auto& r : rhs_)
    for (const auto& s : formula::symbols(r))
      require(allowed(s), "ODE right-hand side references foreign symbol '" + s + "'");
  for (const auto& s : formula::symbols(observable_))
    require(allowed(s), "observable references foreign symbol '" + s + "'");
}

nlohmann::json ConstitutiveModel::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["kind"] = kind_name(kind_);
  j["equation"] = equation_.str();
  j["time"] = time_;
  j["strain"] = strain_;
  j["symbols"] = nlohmann::json::array();
  for (const auto& b : equation_.bindings)
    j["symbols"].push_back({{"name", b.name}, {"role", formula::to_string(b.role)}, {"unit", b.unit}});
  j["parameters"] = parameters_;
  j["conditions"] = conditions_;
  j["constants"] = constants_;
  j["defaults"] = defaults;
  nlohmann::json bj = nlohmann::json::object();
  for (const auto& [k, b] : bounds) bj[k] = {b.lower, b.upper};
  j["bounds"] = bj;
  if (kind_ == ModelKind::Ode) {
    j["states"] = states_;
    std::vector<std::string> rhs;
    for (const auto& r : rhs_) rhs.push_back(formula::render(r));
    j["rhs"] = rhs;
    j["initial"] = optional_;
    j["observable"] = formula::render(observable_);
  }
  return j;
}

ConstitutiveModel ConstitutiveModel::from_json(const nlohmann::json& j) {
  std::vector<formula::SymbolBinding> bindings;
  for (const auto& s : j.at("symbols"))
    bindings.push_back(formula::SymbolBinding::make(
        s.at("name"), formula::role_from_string(s.at("role").get<std::string>()), s.at("unit")));
  formula::Equation eq =
      formula::make_equation(j.at("equation").get<std::string>(), std::move(bindings));
  std::string kind = j.value("kind", "closed_form");
  Values constants = j.value("constants", Values{});
  std::vector<std::string> params = j.at("parameters");
  std::vector<std::string> conditions = j.value("conditions", std::vector<std::string>{});
  std::string time = j.value("time", "t");
  ConstitutiveModel m;
  if (kind == "ode") {
    std::vector<Expression> rhs;
    for (const auto& r : j.at("rhs")) rhs.push_back(formula::parse_expression(r.get<std::string>()));
    m = ode(j.at("name"), std::move(eq), time, j.at("states"), std::move(rhs),
            j.value("initial", std::vector<std::string>{}),
            formula::parse_expression(j.at("observable").get<std::string>()), params, conditions,
            constants);
  } else {
    require(kind == "closed_form" || kind == "rate", "unknown model kind '" + kind + "'");
    m = closed_form(j.at("name"), std::move(eq), j.value("strain", "eps"), time, params,
                    conditions, constants);
  }
  m.defaults = j.value("defaults", Values{});
  if (j.contains("bounds"))
    for (const auto& [k, v] : j.at("bounds").items()) m.bounds[k] = Bounds{v.at(0), v.at(1)};
  return m;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<double>> integrate_rk4(const OdeRhs& f, std::vector<double> y,
                                               double t0, double t1, std::size_t steps) {
  require(steps > 0, "need at least one step");
  const std::size_t n = y.size();
  const double h = (t1 - t0) / static_cast<double>(steps);
  std::vector<std::vector<double>> nodes;
  nodes.reserve(steps + 1);
  nodes.push_back(y);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t i = 0; i < steps; ++i) {
    double t = t0 + h * static_cast<double>(i);
    f(t, y, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    f(t + 0.5 * h, tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    f(t + 0.5 * h, tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * k3[j];
    f(t + h, tmp, k4);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      if (!std::isfinite(y[j]))
        fail(ErrorCode::NumericalOverflow, "state diverged at t = " + std::to_string(t + h));
    }
    nodes.push_back(y);
  }
  return nodes;
}

std::size_t integration_steps(double t_min, double t_max) {
  constexpr std::size_t kBase = 2000;
  constexpr double kCap = 4e6;
  if (t_max <= 0.0) return kBase;
  double span = t_max - t_min;
  if (span <= 0.0) return kBase;
  double needed = std::ceil(t_max / (span / static_cast<double>(kBase)) - 1e-9);
  if (needed > kCap)
    fail(ErrorCode::Precondition, "requested time window too narrow relative to its offset");
  return std::max(kBase, static_cast<std::size_t>(needed));
}

namespace {

void check_times(std::span<const double> times) {
  require(!times.empty(), "no evaluation times");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "times must be strictly increasing");
  for (double t : times) require(std::isfinite(t), "non-finite time");
}

// Slot layout shared by all compiled expressions of one evaluation.
struct Layout {
  std::vector<std::string> names;
  std::vector<double> base;  // time, states zeroed; params, conditions, constants filled
  std::size_t time_slot = 0;
  std::size_t state_begin = 1;

  Layout(const ConstitutiveModel& m, const Values& params, const Values& conditions) {
    names.push_back(m.time_symbol());
    base.push_back(0.0);
    for (const auto& s : m.states()) {
      names.push_back(s);
      base.push_back(0.0);
    }
    auto add = [&](const std::string& name, double v) {
      if (std::find(names.begin(), names.end(), name) != names.end()) return;
      names.push_back(name);
      base.push_back(v);
    };
    for (const auto& p : m.parameters()) {
      auto it = params.find(p);
      if (it == params.end()) fail(ErrorCode::UnboundSymbol, p);
      add(p, it->second);
    }
    for (const auto& p : m.optional_parameters()) {
      auto it = params.find(p);
      add(p, it == params.end() ? 0.0 : it->second);
    }
    for (const auto& c : m.conditions()) {
      auto it = conditions.find(c);
      if (it == conditions.end()) fail(ErrorCode::UnboundSymbol, c);
      add(c, it->second);
    }
    for (const auto& [k, v] : m.constants()) add(k, v);
  }

  std::size_t slot(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    require(it != names.end(), "unknown symbol '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }
};

void check_finite(double v, double t) {
  if (!std::isfinite(v))
    fail(ErrorCode::NumericalOverflow, "non-finite model value at t = " + std::to_string(t));
}

Jacobian closed_form_eval(const ConstitutiveModel& m, const Layout& layout,
                          std::span<const double> times, const std::vector<std::string>& wrt) {
  formula::CompiledExpression f(m.equation().rhs, layout.names);
  std::vector<formula::CompiledExpression> df;
  for (const auto& p : wrt)
    df.emplace_back(formula::differentiate(m.equation().rhs, p), layout.names);
  Jacobian out;
  out.columns = wrt.size();
  std::vector<double> slots = layout.base;
  for (double t : times) {
    slots[layout.time_slot] = t;
    double v = f(slots.data());
    check_finite(v, t);
    out.values.push_back(v);
    for (const auto& d : df) {
      double g = d(slots.data());
      // t^m * ln(t) and similar limits at t = 0
      if (!std::isfinite(g) && t == 0.0) g = 0.0;
      out.derivatives.push_back(g);
    }
  }
  return out;
}

Jacobian integrated_eval(const ConstitutiveModel& m, const Layout& layout,
                         std::span<const double> times, const std::vector<std::string>& wrt) {
  for (double t : times) require(t >= 0.0, "integrated models start at t = 0");
  const std::size_t n = m.states().size();
  const std::size_t p = wrt.size();
  const auto& names = layout.names;

  std::vector<formula::CompiledExpression> f;
  std::vector<formula::CompiledExpression> fy;  // n x n
  std::vector<formula::CompiledExpression> fp;  // n x p
  for (const auto& r : m.rhs()) {
    f.emplace_back(r, names);
    if (p == 0) continue;
    for (const auto& s : m.states()) fy.emplace_back(formula::differentiate(r, s), names);
    for (const auto& w : wrt) fp.emplace_back(formula::differentiate(r, w), names);
  }
  formula::CompiledExpression obs(m.observable(), names);
  std::vector<formula::CompiledExpression> obs_y, obs_p;
  if (p > 0) {
    for (const auto& s : m.states()) obs_y.emplace_back(formula::differentiate(m.observable(), s), names);
    for (const auto& w : wrt) obs_p.emplace_back(formula::differentiate(m.observable(), w), names);
  }

  // Augmented state: y (n) followed by sensitivities S (n x p, row-major).
  std::vector<double> y0(n + n * p, 0.0);
  const auto& initial = m.optional_parameters();
  for (std::size_t i = 0; i < n && i < initial.size(); ++i) {
    y0[i] = layout.base[layout.slot(initial[i])];
    for (std::size_t k = 0; k < p; ++k)
      if (wrt[k] == initial[i]) y0[n + i * p + k] = 1.0;
  }

  std::vector<double> slots = layout.base;
  OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    slots[layout.time_slot] = t;
    for (std::size_t i = 0; i < n; ++i) slots[layout.state_begin + i] = y[i];
    for (std::size_t i = 0; i < n; ++i) dy[i] = f[i](slots.data());
    if (p == 0) return;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < p; ++k) {
        double acc = fp[i * p + k](slots.data());
        for (std::size_t j = 0; j < n; ++j) acc += fy[i * n + j](slots.data()) * y[n + j * p + k];
        dy[n + i * p + k] = acc;
      }
    }
  };

  const double t_end = times.back();
  const std::size_t steps = integration_steps(times.front(), t_end);
  auto nodes = integrate_rk4(rhs, y0, 0.0, t_end, steps);
  const double h = t_end / static_cast<double>(steps);

  Jacobian out;
  out.columns = p;
  std::vector<double> state(n + n * p);
  for (double t : times) {
    // linear interpolation between integration nodes
    double pos = h > 0 ? t / h : 0.0;
    std::size_t i0 = std::min(static_cast<std::size_t>(std::floor(pos)), steps);
    std::size_t i1 = std::min(i0 + 1, steps);
    double w = i0 == i1 ? 0.0 : pos - static_cast<double>(i0);
    for (std::size_t j = 0; j < state.size(); ++j)
      state[j] = (1.0 - w) * nodes[i0][j] + w * nodes[i1][j];
    slots[layout.time_slot] = t;
    for (std::size_t i = 0; i < n; ++i) slots[layout.state_begin + i] = state[i];
    double v = obs(slots.data());
    check_finite(v, t);
    out.values.push_back(v);
    for (std::size_t k = 0; k < p; ++k) {
      double g = obs_p[k](slots.data());
      for (std::size_t i = 0; i < n; ++i) g += obs_y[i](slots.data()) * state[n + i * p + k];
      out.derivatives.push_back(g);
    }
  }
  return out;
}

}  // namespace

Jacobian evaluate_with_jacobian(const ConstitutiveModel& model, const Values& params,
                                const Values& conditions, std::span<const double> times,
                                const std::vector<std::string>& wrt) {
  check_times(times);
  Layout layout(model, params, conditions);
  for (const auto& w : wrt)
    require(contains(model.parameters(), w) || contains(model.optional_parameters(), w),
            "'" + w + "' is not a parameter of " + model.name());
  if (model.kind() == ModelKind::ClosedForm) return closed_form_eval(model, layout, times, wrt);
  return integrated_eval(model, layout, times, wrt);
}

std::vector<double> evaluate(const ConstitutiveModel& model, const Values& params,
                             const Values& conditions, std::span<const double> times) {
  return evaluate_with_jacobian(model, params, conditions, times, {}).values;
}

double r_squared(std::span<const double> observed, std::span<const double> predicted) {
  require(observed.size() == predicted.size(), "observed and predicted lengths differ");
  require(observed.size() >= 3, "r_squared needs at least 3 points");
  // All-equal is tested directly; the rounded mean can leave a tiny SS_tot.
  if (std::all_of(observed.begin(), observed.end(), [&](double o) { return o == observed[0]; }))
    fail(ErrorCode::DegenerateObservations, "observed values have zero variance");
  double mean = 0.0;
  for (double o : observed) mean += o;
  mean /= static_cast<double>(observed.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ss_tot += (observed[i] - mean) * (observed[i] - mean);
    ss_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
  }
  if (ss_tot == 0.0) fail(ErrorCode::DegenerateObservations, "observed values have zero variance");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace creepdb::models
