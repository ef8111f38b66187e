#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace creepdb::screening {

/// Relevance verdict for one document. `pass` is derived, never stored
/// independently, so it always equals has_data && has_equation.
class ScreeningDecision {
 public:
  ScreeningDecision(std::string bundle_id, bool has_data, bool has_equation,
                    std::string rationale = {});

  const std::string& bundle_id() const { return bundle_id_; }
  bool has_data() const { return has_data_; }
  bool has_equation() const { return has_equation_; }
  bool pass() const { return has_data_ && has_equation_; }
  const std::string& rationale() const { return rationale_; }

  nlohmann::json to_json() const;

 private:
  std::string bundle_id_;
  bool has_data_;
  bool has_equation_;
  std::string rationale_;
};

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::uint64_t total() const { return tp + fp + tn + fn; }
  nlohmann::json to_json() const;
};

/// Throws MissingTruth when a decision has no ground-truth entry.
ConfusionCounts confusion(const std::vector<ScreeningDecision>& decisions,
                          const std::map<std::string, bool>& truth);

/// Each throws UndefinedMetric on a zero denominator.
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);
/// Harmonic mean of a precision/recall pair.
double f1(double precision, double recall);
double accuracy(const ConfusionCounts& c);

/// Reads `bundle_id,relevant` rows (relevant in {0,1}); a header row and
/// '#' comments are skipped. Throws MalformedManifest on bad rows.
std::map<std::string, bool> load_truth_csv(const std::string& path);

/// Reads `bundle_id,has_data,has_equation[,rationale]` rows as written by
/// decisions_to_csv.
std::vector<ScreeningDecision> load_decisions_csv(const std::string& path);
std::string decisions_to_csv(const std::vector<ScreeningDecision>& decisions);

/// Metrics report in human-readable and JSON form; undefined metrics are
/// reported as "undefined" / null.
std::string metrics_text(const ConfusionCounts& c);
nlohmann::json metrics_json(const ConfusionCounts& c);

}  // namespace creepdb::screening
