#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

struct sqlite3;

namespace creepdb::store {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExportVersion = 1;

struct PaperRow {
  std::string doi;
  std::string title;
  std::vector<std::string> authors;
  int year = 0;
  std::string source_path;

  nlohmann::json to_json() const;
  static PaperRow from_json(const nlohmann::json& j);
  friend bool operator==(const PaperRow&, const PaperRow&) = default;
};

struct RecordParam {
  std::string name;
  double value = 0.0;  // canonical
  std::string unit;
  friend bool operator==(const RecordParam&, const RecordParam&) = default;
};

struct CurvePoint {
  double t = 0.0;  // s
  double strain = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Stored verdict labels.
inline const std::set<std::string> kRecordVerdicts = {"Valid", "Valid-TextOnly", "Flagged"};

struct CreepRecord {
  std::int64_t record_id = 0;
  std::string doi;
  std::string material;
  std::string category = "other";
  double temperature_K = 0.0;
  double stress_MPa = 0.0;
  std::string model_name;
  /// Serialized equation or ODE system.
  nlohmann::json model = nlohmann::json::object();
  std::vector<RecordParam> params;
  std::string params_source;
  std::vector<CurvePoint> curve;
  std::string verdict;
  std::optional<double> r2;
  std::optional<std::string> figure_id;
  std::vector<std::string> text_locations;
  /// Validation report as produced by the guardrail.
  nlohmann::json report = nlohmann::json::object();

  nlohmann::json to_json(bool with_curve = true) const;
  static CreepRecord from_json(const nlohmann::json& j);
  /// Throws ConstraintViolation.
  void check() const;
  friend bool operator==(const CreepRecord&, const CreepRecord&) = default;
};

struct RecordFilter {
  std::optional<std::string> material;  // case-insensitive substring
  std::optional<std::string> category;
  std::optional<double> t_min_K, t_max_K;
  std::optional<double> s_min_MPa, s_max_MPa;
  std::set<std::string> verdicts;  // empty means any

  /// Throws Precondition naming the offending field.
  void check() const;
  bool matches(const CreepRecord& r) const;
};

struct RejectedEntry {
  std::int64_t entry_id = 0;
  std::string bundle_id;
  std::string doi;
  std::string stage;  // validation or review
  std::vector<std::string> reasons;
  nlohmann::json payload = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct AuditEvent {
  std::int64_t seq = 0;
  std::int64_t record_id = 0;
  std::string action;
  std::string from_verdict;
  std::string to_verdict;
  std::string note;
  std::string timestamp;

  nlohmann::json to_json() const;
};

enum class ReviewAction { Approve, Reject };
ReviewAction review_action_from_string(const std::string& s);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;  // edges.size() - 1 bins; the last is closed
  std::size_t underflow = 0;
  std::size_t overflow = 0;

  nlohmann::json to_json() const;
};

/// Bins `values` into [e_i, e_{i+1}); the last bin includes its upper edge.
Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges);

struct StatsOptions {
  std::vector<double> temperature_edges = {0,   200, 400,  600,  800,  1000,
                                           1200, 1400, 1600, 1800, 2000};
  std::vector<double> stress_edges = {0, 1, 5, 10, 20, 50, 100, 200, 500, 1000, 2000};
};

struct Stats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> category_counts;
  std::map<std::string, double> category_shares;
  Histogram temperature;
  Histogram stress;
  std::map<std::string, std::vector<std::pair<double, double>>> scatter;  // (T, sigma)

  nlohmann::json to_json() const;
};

/// SQLite-backed record store. All calls are serialized through one
/// connection mutex, so a Store may be shared between threads.
class Store {
 public:
  /// ":memory:" opens a private in-memory database. Throws StoreUnavailable.
  explicit Store(const std::string& path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::string& path() const { return path_; }

  /// Throws DuplicateDoi.
  void insert_paper(const PaperRow& row);
  /// Inserts unless an identical row exists; DuplicateDoi if it differs.
  void ensure_paper(const PaperRow& row);
  std::optional<PaperRow> paper(const std::string& doi) const;
  std::vector<PaperRow> papers() const;

  /// Assigns a fresh id unless `rec.record_id` > 0. Throws UnknownDoi,
  /// ConstraintViolation, or Conflict when the id is taken.
  std::int64_t insert_record(const CreepRecord& rec);
  std::optional<CreepRecord> record(std::int64_t id) const;
  /// Ordered by (doi, record_id).
  std::vector<CreepRecord> query(const RecordFilter& filter = {}) const;
  std::size_t record_count() const;

  std::int64_t insert_rejected(const RejectedEntry& entry);
  std::vector<RejectedEntry> rejected() const;

  /// Flagged -> Valid (approve) or Flagged -> audit table (reject).
  /// Throws NotFound or Conflict. Returns the record after the action.
  CreepRecord review(std::int64_t record_id, ReviewAction action, const std::string& note);
  std::vector<AuditEvent> audit_log() const;

  /// Records that break a stored-data invariant, as readable messages.
  std::vector<std::string> audit_violations(double valid_threshold) const;

  std::string export_csv(const RecordFilter& filter = {}) const;
  /// Writes `records.csv` and `curves/record_<id>.csv` under `dir`.
  void export_csv_files(const RecordFilter& filter, const std::string& dir) const;
  /// Versioned structured export of papers and matching records.
  nlohmann::json export_data(const RecordFilter& filter = {}) const;
  /// Inserts papers and records from `export_data` output, keeping ids.
  void import_data(const nlohmann::json& data);

  Stats stats(const RecordFilter& filter = {}, const StatsOptions& options = {}) const;

 private:
  void init_schema();
  std::int64_t insert_record_locked(const CreepRecord& rec);
  std::optional<PaperRow> paper_locked(const std::string& doi) const;
  std::optional<CreepRecord> record_locked(std::int64_t id) const;

  std::string path_;
  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
};

/// Header row of the csv export.
inline constexpr const char* kCsvHeader =
    "record_id,doi,material,category,temperature_K,stress_MPa,model_name,params,verdict,r2,n_points";

std::string curve_csv(const CreepRecord& rec);

}  // namespace creepdb::store
