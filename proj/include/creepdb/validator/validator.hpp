#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/formula/equation.hpp"
#include "creepdb/models/model.hpp"

namespace creepdb::validator {

/// Strain-time points in canonical units (s, strain fraction).
struct CreepCurve {
  std::vector<double> times;
  std::vector<double> strains;
  /// Points the digitizer dropped or merged while enforcing monotonicity.
  std::size_t monotonicity_flags = 0;
  /// Figure id, series key, calibration and trace quality.
  nlohmann::json source = nlohmann::json::object();

  std::size_t size() const { return times.size(); }
  /// Throws Precondition unless sizes agree and times strictly increase.
  void check() const;

  nlohmann::json to_json() const;
  static CreepCurve from_json(const nlohmann::json& j);
};

/// A parameter as reported, plus its canonical value.
struct TextParam {
  std::string name;
  double value = 0.0;  // as stated
  std::string unit;    // as stated
  double canonical = 0.0;
};

struct CandidateEntry {
  std::string bundle_id;
  std::string doi;
  std::string material;
  std::string category;
  double temperature_K = 0.0;
  double stress_MPa = 0.0;
  /// Published equation text and its symbol table.
  std::optional<std::string> equation;
  std::vector<formula::SymbolBinding> symbols;
  std::optional<models::ConstitutiveModel> model;
  std::vector<TextParam> text_params;
  std::optional<CreepCurve> curve;
  std::optional<std::string> figure_id;
  std::vector<std::string> text_locations;

  /// Throws Precondition when neither an equation nor a curve is present.
  void check() const;
  const TextParam* param(const std::string& name) const;

  nlohmann::json to_json() const;
  static CandidateEntry from_json(const nlohmann::json& j);
};

struct Thresholds {
  double valid = 0.9;   // r2 strictly above passes
  double review = 0.5;  // r2 strictly above (and not passing) is Flagged
  double strain_min = -0.01;
  double strain_max = 2.0;

  void check() const;
};

struct LegResult {
  bool pass = false;
  std::string reason;  // empty on pass
  std::string detail;

  nlohmann::json to_json() const;
};

enum class Verdict { Valid, Flagged, Rejected };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& text);

/// The verdict recommended by an r2 value alone.
Verdict verdict_for_r2(double r2, const Thresholds& thresholds);

struct CrossModalResult {
  std::optional<double> r2;
  std::string params_source;  // text, fitted or mixed
  bool pass = false;
  Verdict recommendation = Verdict::Flagged;
  /// Error code name when evaluation failed (DegenerateObservations, ...).
  std::string error;
  std::string detail;
  /// Every model parameter used, canonical units.
  models::Values params;
  std::vector<std::string> fitted;
  std::vector<double> predicted;

  nlohmann::json to_json() const;
};

struct ValidationReport {
  LegResult completeness;
  LegResult relevance;
  LegResult integrity;
  std::optional<formula::HomogeneityReport> homogeneity;
  std::optional<CrossModalResult> cross_modal;
  Verdict verdict = Verdict::Rejected;
  bool text_only = false;

  /// "Valid", "Valid-TextOnly", "Flagged" or "Rejected".
  std::string label() const;
  /// Short machine-readable reasons for a non-Valid verdict.
  std::vector<std::string> reasons() const;
  nlohmann::json to_json() const;
};

LegResult check_completeness(const CandidateEntry& entry);
/// Assumes completeness passed; fails otherwise.
LegResult check_relevance(const CandidateEntry& entry);
LegResult check_integrity(const CandidateEntry& entry,
                          formula::HomogeneityReport* report_out = nullptr);
/// Requires a curve and a model. Numeric failures are recorded in the
/// result rather than thrown.
CrossModalResult cross_modal_check(const CandidateEntry& entry, const Thresholds& thresholds);

ValidationReport validate_entry(const CandidateEntry& entry, const Thresholds& thresholds = {});

}  // namespace creepdb::validator
