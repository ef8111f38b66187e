#include "creepdb/validator/validator.hpp"

#include <algorithm>
#include <cmath>

#include "creepdb/error.hpp"

namespace creepdb::validator {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Data types

void CreepCurve::check() const {
  require(times.size() == strains.size(), "curve times and strains differ in length");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "curve times must be strictly increasing");
  for (std::size_t i = 0; i < times.size(); ++i)
    require(std::isfinite(times[i]) && std::isfinite(strains[i]), "curve has a non-finite point");
}

json CreepCurve::to_json() const {
  return {{"times", times}, {"strains", strains}, {"monotonicity_flags", monotonicity_flags},
          {"source", source}};
}

CreepCurve CreepCurve::from_json(const json& j) {
  CreepCurve c;
  c.times = j.at("times").get<std::vector<double>>();
  c.strains = j.at("strains").get<std::vector<double>>();
  c.monotonicity_flags = j.value("monotonicity_flags", std::size_t{0});
  c.source = j.value("source", json::object());
  return c;
}

void CandidateEntry::check() const {
  require(equation.has_value() || curve.has_value(),
          "candidate " + bundle_id + " has neither an equation nor a curve");
}

const TextParam* CandidateEntry::param(const std::string& name) const {
  for (const auto& p : text_params)
    if (p.name == name) return &p;
  return nullptr;
}

json CandidateEntry::to_json() const {
  json j{{"bundle_id", bundle_id},       {"doi", doi},
         {"material", material},         {"category", category},
         {"temperature_K", temperature_K}, {"stress_MPa", stress_MPa}};
  j["equation"] = equation ? json(*equation) : json(nullptr);
  j["symbols"] = json::array();
  for (const auto& s : symbols)
    j["symbols"].push_back({{"name", s.name}, {"role", formula::to_string(s.role)}, {"unit", s.unit}});
  j["model"] = model ? model->to_json() : json(nullptr);
  j["text_params"] = json::array();
  for (const auto& p : text_params)
    j["text_params"].push_back(
        {{"name", p.name}, {"value", p.value}, {"unit", p.unit}, {"canonical", p.canonical}});
  j["curve"] = curve ? curve->to_json() : json(nullptr);
  j["figure_id"] = figure_id ? json(*figure_id) : json(nullptr);
  j["text_locations"] = text_locations;
  return j;
}

CandidateEntry CandidateEntry::from_json(const json& j) {
  CandidateEntry e;
  e.bundle_id = j.at("bundle_id").get<std::string>();
  e.doi = j.at("doi").get<std::string>();
  e.material = j.value("material", "");
  e.category = j.value("category", "other");
  e.temperature_K = j.at("temperature_K").get<double>();
  e.stress_MPa = j.at("stress_MPa").get<double>();
  if (j.contains("equation") && !j["equation"].is_null()) e.equation = j["equation"].get<std::string>();
  for (const auto& s : j.value("symbols", json::array()))
    e.symbols.push_back(formula::SymbolBinding::make(s.at("name").get<std::string>(),
                                                     formula::role_from_string(s.at("role").get<std::string>()),
                                                     s.at("unit").get<std::string>()));
  if (j.contains("model") && !j["model"].is_null())
    e.model = models::ConstitutiveModel::from_json(j["model"]);
  for (const auto& p : j.value("text_params", json::array()))
    e.text_params.push_back({p.at("name").get<std::string>(), p.at("value").get<double>(),
                             p.at("unit").get<std::string>(), p.at("canonical").get<double>()});
  if (j.contains("curve") && !j["curve"].is_null()) e.curve = CreepCurve::from_json(j["curve"]);
  if (j.contains("figure_id") && !j["figure_id"].is_null()) e.figure_id = j["figure_id"].get<std::string>();
  e.text_locations = j.value("text_locations", std::vector<std::string>{});
  return e;
}

void Thresholds::check() const {
  require(review < valid, "review threshold must lie below the valid threshold");
  require(valid <= 1.0, "valid threshold above 1 can never pass");
  require(strain_min < strain_max, "strain band is empty");
}

json LegResult::to_json() const {
  json j{{"pass", pass}};
  if (!reason.empty()) j["reason"] = reason;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Valid: return "Valid";
    case Verdict::Flagged: return "Flagged";
    case Verdict::Rejected: return "Rejected";
  }
  return "Rejected";
}

Verdict verdict_from_string(const std::string& text) {
  if (text == "Valid" || text == "Valid-TextOnly") return Verdict::Valid;
  if (text == "Flagged") return Verdict::Flagged;
  if (text == "Rejected") return Verdict::Rejected;
  fail(ErrorCode::Precondition, "unknown verdict '" + text + "'");
}

Verdict verdict_for_r2(double r2, const Thresholds& thresholds) {
  if (r2 > thresholds.valid) return Verdict::Valid;
  if (r2 > thresholds.review) return Verdict::Flagged;
  return Verdict::Rejected;
}

json CrossModalResult::to_json() const {
  json j{{"r2", r2 ? json(*r2) : json(nullptr)},
         {"params_source", params_source},
         {"pass", pass},
         {"recommendation", to_string(recommendation)},
         {"params", params},
         {"fitted", fitted}};
  if (!error.empty()) j["error"] = error;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

std::string ValidationReport::label() const {
  if (verdict == Verdict::Valid && text_only) return "Valid-TextOnly";
  return to_string(verdict);
}

std::vector<std::string> ValidationReport::reasons() const {
  std::vector<std::string> out;
  for (const auto* leg : {&completeness, &relevance, &integrity})
    if (!leg->pass && !leg->reason.empty()) out.push_back(leg->reason);
  if (cross_modal && !cross_modal->pass) {
    if (!cross_modal->error.empty())
      out.push_back(cross_modal->error);
    else
      out.push_back("LowR2");
  }
  if (!cross_modal && !text_only && verdict == Verdict::Flagged) out.push_back("NoModelForCurve");
  return out;
}

json ValidationReport::to_json() const {
  json j{{"completeness", completeness.to_json()},
         {"relevance", relevance.to_json()},
         {"integrity", integrity.to_json()},
         {"verdict", to_string(verdict)},
         {"label", label()},
         {"reasons", reasons()}};
  j["homogeneity"] = homogeneity ? homogeneity->to_json() : json(nullptr);
  if (cross_modal) {
    j["cross_modal"] = cross_modal->to_json();
  } else {
    j["cross_modal"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Legs

namespace {

const std::vector<formula::SymbolBinding>& bindings_of(const CandidateEntry& entry) {
  if (entry.symbols.empty() && entry.model) return entry.model->equation().bindings;
  return entry.symbols;
}

struct ParsedEquation {
  std::optional<formula::Equation> eq;
  LegResult leg;
};

ParsedEquation parse_entry_equation(const CandidateEntry& entry) {
  ParsedEquation out;
  if (!entry.equation) {
    out.leg = {false, "MissingEquation", "no equation was extracted"};
    return out;
  }
  try {
    out.eq = formula::make_equation(*entry.equation, bindings_of(entry));
  } catch (const Error& e) {
    out.leg = {false, std::string(to_string(e.code())), e.what()};
    return out;
  }
  if (formula::symbols(out.eq->lhs).empty() || formula::symbols(out.eq->rhs).empty()) {
    out.leg = {false, "DescriptiveFragment", "one side of '" + out.eq->str() + "' has no symbols"};
    return out;
  }
  out.leg = {true, "", ""};
  return out;
}

std::optional<std::string> time_symbol(const formula::Equation& eq) {
  for (const auto& b : eq.bindings)
    if (b.role == formula::Role::Time) return b.name;
  return std::nullopt;
}

void collect_derivatives(const formula::Expression& e, std::vector<formula::Expression>& out) {
  if (e.op() == formula::Op::Derivative) {
    out.push_back(e);
    return;
  }
  for (const auto& c : e.children()) collect_derivatives(c, out);
}

/// Quantity described by the lhs: a plain symbol, the target of a derivative,
/// or the common target of every derivative in an ODE lhs.
std::optional<std::string> lhs_quantity(const formula::Expression& lhs) {
  if (lhs.op() == formula::Op::Symbol) return lhs.name();
  std::vector<formula::Expression> ds;
  collect_derivatives(lhs, ds);
  if (ds.empty()) return std::nullopt;
  for (const auto& d : ds)
    if (d.name() != ds.front().name()) return std::nullopt;
  return ds.front().name();
}

}  // namespace

LegResult check_completeness(const CandidateEntry& entry) { return parse_entry_equation(entry).leg; }

LegResult check_relevance(const CandidateEntry& entry) {
  auto parsed = parse_entry_equation(entry);
  if (!parsed.leg.pass) return {false, "IncompleteEquation", "completeness failed"};
  const auto& eq = *parsed.eq;

  auto t = time_symbol(eq);
  std::vector<formula::Expression> ds;
  collect_derivatives(eq.lhs, ds);
  collect_derivatives(eq.rhs, ds);
  bool time_dependent = false;
  if (t) {
    auto syms = formula::symbols(eq.lhs);
    auto rhs_syms = formula::symbols(eq.rhs);
    syms.insert(rhs_syms.begin(), rhs_syms.end());
    time_dependent = syms.count(*t) > 0;
  }
  for (const auto& d : ds)
    if (t && d.wrt() == *t) time_dependent = true;
  if (!time_dependent)
    return {false, "NotTimeDependent", "'" + eq.str() + "' has no time symbol or time derivative"};

  auto q = lhs_quantity(eq.lhs);
  const formula::SymbolBinding* b = q ? eq.find(*q) : nullptr;
  if (!b || b->role != formula::Role::Strain)
    return {false, "NotStrain", "the left-hand side of '" + eq.str() + "' is not strain or strain rate"};
  return {true, "", ""};
}

LegResult check_integrity(const CandidateEntry& entry, formula::HomogeneityReport* report_out) {
  auto parsed = parse_entry_equation(entry);
  if (!parsed.leg.pass) return {false, "IncompleteEquation", "completeness failed"};
  const auto& eq = *parsed.eq;

  auto syms = formula::symbols(eq.lhs);
  auto rhs_syms = formula::symbols(eq.rhs);
  syms.insert(rhs_syms.begin(), rhs_syms.end());
  std::vector<std::string> unbound;
  for (const auto& s : syms)
    if (!eq.find(s)) unbound.push_back(s);

  auto report = formula::check_homogeneity(eq);
  if (report_out) *report_out = report;
  if (!unbound.empty()) {
    std::string names;
    for (const auto& s : unbound) names += (names.empty() ? "" : ", ") + s;
    return {false, "UnboundSymbol", "UnboundSymbol(" + names + ")"};
  }
  if (!report.pass) {
    const auto& f = report.failures.front();
    return {false, f.code, f.message};
  }
  return {true, "", ""};
}

// ---------------------------------------------------------------------------
// Cross-modal gate

namespace {

models::Values condition_values(const CandidateEntry& entry) {
  const auto& model = *entry.model;
  models::Values out;
  for (const auto& c : model.conditions()) {
    const auto* b = model.equation().find(c);
    if (!b) continue;
    if (b->role == formula::Role::Stress) out[c] = entry.stress_MPa;
    if (b->role == formula::Role::Temperature) out[c] = entry.temperature_K;
  }
  return out;
}

}  // namespace

CrossModalResult cross_modal_check(const CandidateEntry& entry, const Thresholds& thresholds) {
  require(entry.curve.has_value() && entry.model.has_value(),
          "cross-modal check needs a curve and a model");
  const auto& model = *entry.model;
  const auto& curve = *entry.curve;
  CrossModalResult out;
  out.recommendation = Verdict::Flagged;

  models::Values fixed;
  models::Values missing;
  for (const auto& p : model.parameters()) {
    if (const auto* tp = entry.param(p)) {
      fixed[p] = tp->canonical;
    } else {
      auto d = model.defaults.find(p);
      missing[p] = d != model.defaults.end() ? d->second : 1.0;
    }
  }
  for (const auto& p : model.optional_parameters())
    if (const auto* tp = entry.param(p)) fixed[p] = tp->canonical;

  if (missing.empty())
    out.params_source = "text";
  else if (fixed.empty())
    out.params_source = "fitted";
  else
    out.params_source = "mixed";

  try {
    curve.check();
    for (double s : curve.strains)
      if (s < thresholds.strain_min || s > thresholds.strain_max) {
        out.error = "StrainOutOfRange";
        out.detail = "strain " + std::to_string(s) + " outside the sanity band";
        return out;
      }
    auto conditions = condition_values(entry);
    models::Values params = fixed;
    if (!missing.empty()) {
      auto fit = models::fit_parameters(model, curve.times, curve.strains, conditions, missing, fixed);
      params = fit.params;
      for (const auto& [name, _] : missing) out.fitted.push_back(name);
    }
    out.params = params;
    out.predicted = models::evaluate(model, params, conditions, curve.times);
    double r2 = models::r_squared(curve.strains, out.predicted);
    out.r2 = r2;
    out.recommendation = verdict_for_r2(r2, thresholds);
    out.pass = out.recommendation == Verdict::Valid;
  } catch (const Error& e) {
    out.error = std::string(to_string(e.code()));
    out.detail = e.what();
    out.pass = false;
    out.recommendation = Verdict::Flagged;
  }
  return out;
}

ValidationReport validate_entry(const CandidateEntry& entry, const Thresholds& thresholds) {
  thresholds.check();
  ValidationReport report;
  report.completeness = check_completeness(entry);
  if (!report.completeness.pass) {
    report.relevance = {false, "IncompleteEquation", "not checked"};
    report.integrity = {false, "IncompleteEquation", "not checked"};
    report.verdict = Verdict::Rejected;
    return report;
  }
  report.relevance = check_relevance(entry);
  formula::HomogeneityReport homogeneity;
  report.integrity = check_integrity(entry, &homogeneity);
  report.homogeneity = homogeneity;
  if (!report.relevance.pass || !report.integrity.pass) {
    report.verdict = Verdict::Rejected;
    return report;
  }
  if (!entry.curve) {
    report.text_only = true;
    report.verdict = Verdict::Valid;
    return report;
  }
  if (!entry.model) {
    report.verdict = Verdict::Flagged;
    return report;
  }
  report.cross_modal = cross_modal_check(entry, thresholds);
  report.verdict = report.cross_modal->recommendation;
  return report;
}

}  // namespace creepdb::validator
