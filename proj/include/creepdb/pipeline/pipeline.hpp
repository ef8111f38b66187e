#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/corpus/corpus.hpp"
#include "creepdb/models/catalog.hpp"
#include "creepdb/pipeline/config.hpp"
#include "creepdb/screening/metrics.hpp"
#include "creepdb/skills/personas.hpp"
#include "creepdb/store/store.hpp"
#include "creepdb/validator/validator.hpp"

namespace creepdb::pipeline {

struct StageEvent {
  std::string stage;    // collection, screening, extraction, validation, storage
  std::string outcome;  // pass, fail, error, ...
  std::string detail;
};

struct DocumentTrace {
  std::string bundle_id;
  std::string doi;
  /// rejected-at-screening, rejected-at-validation, flagged, stored, failed
  /// (a per-document error) or not-stored (dry run).
  std::string terminal;
  std::vector<StageEvent> events;
  std::string error_code;
  std::optional<std::int64_t> record_id;

  nlohmann::json to_json() const;
};

struct PipelineReport {
  std::size_t collected = 0;
  std::size_t screened_pass = 0;
  std::size_t screened_fail = 0;
  std::size_t extracted = 0;
  std::size_t validated_valid = 0;
  std::size_t validated_flagged = 0;
  std::size_t validated_rejected = 0;
  std::size_t stored = 0;
  std::vector<DocumentTrace> traces;
  double duration_s = 0.0;
  /// Tools that were executed, per skill.
  std::map<std::string, std::set<std::string>> executed_tools;

  /// stored <= validated_valid <= extracted <= screened_pass <= collected.
  bool funnel_holds() const;
  nlohmann::json to_json() const;
  /// Counts only (no timing), stable across identical runs.
  std::string summary() const;
};

/// Everything the stages share. Built once per run.
class PipelineContext {
 public:
  PipelineContext(const corpus::CorpusIndex& index, const PipelineConfig& config,
                  skills::ReasoningBackend& backend, store::Store* store,
                  const models::Catalog& catalog, skills::ExecutionLog* log = nullptr);

  const corpus::CorpusIndex& index() const { return index_; }
  const PipelineConfig& config() const { return config_; }
  const skills::Personas& personas() const { return personas_; }
  const skills::ToolRegistry& tools() const { return tools_; }
  const models::Catalog& catalog() const { return catalog_; }
  skills::ReasoningBackend& backend() const { return backend_; }
  skills::ExecutionLog& log() const { return *log_; }

 private:
  const corpus::CorpusIndex& index_;
  const PipelineConfig& config_;
  skills::ReasoningBackend& backend_;
  store::Store* store_;
  const models::Catalog& catalog_;
  skills::Personas personas_;
  skills::ToolRegistry tools_;
  skills::ExecutionLog own_log_;
  skills::ExecutionLog* log_;
};

/// Stage 1: ids matching the configured query (all ids without one).
std::vector<std::string> collect(const PipelineContext& ctx);
/// Stage 2.
screening::ScreeningDecision screen_document(const PipelineContext& ctx, const std::string& id);
/// Stage 3: parser skill plus figure digitization. Throws on failure.
validator::CandidateEntry extract_candidate(const PipelineContext& ctx, const std::string& id);
/// Stage 4, through the guardrail's physics_validation tool.
nlohmann::json validate_candidate(const PipelineContext& ctx, const validator::CandidateEntry& entry);

/// Converts the parser's structured output into a candidate; `digitize`
/// turns a figure description into a canonical curve.
validator::CandidateEntry build_candidate(const corpus::DocumentBundle& bundle,
                                          const nlohmann::json& extraction,
                                          const models::Catalog& catalog,
                                          const nlohmann::json& digitized);

/// Digitizes the described figure of `bundle`. Returns {figure_id,
/// series_key, quality, calibration, flags, times_s, strains}. `monotone`
/// enables the monotonicity clean-up.
nlohmann::json digitize_figure(const corpus::DocumentBundle& bundle, const nlohmann::json& figure,
                               bool monotone, int tolerance, std::size_t min_pixels);

/// Store row for a validated candidate.
store::CreepRecord make_record(const validator::CandidateEntry& entry, const nlohmann::json& report);
store::PaperRow paper_of(const corpus::DocumentBundle& bundle);

/// Runs all five stages. Per-document failures land in the trace; only
/// StoreUnavailable aborts the run. Writes happen in collection order.
PipelineReport run_pipeline(const corpus::CorpusIndex& index, const PipelineConfig& config,
                            skills::ReasoningBackend& backend, store::Store& store,
                            const models::Catalog& catalog = models::builtin_catalog(),
                            skills::ExecutionLog* log = nullptr);

/// Loads the configured catalog file or the builtin one.
models::Catalog load_catalog(const PipelineConfig& config);

}  // namespace creepdb::pipeline
