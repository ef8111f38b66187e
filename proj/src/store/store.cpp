#include "creepdb/store/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "creepdb/error.hpp"
#include "creepdb/text.hpp"
#include "creepdb/vocabulary.hpp"

namespace creepdb::store {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Row types

json PaperRow::to_json() const {
  return {{"doi", doi}, {"title", title}, {"authors", authors}, {"year", year}, {"source_path", source_path}};
}

PaperRow PaperRow::from_json(const json& j) {
  return {j.at("doi").get<std::string>(), j.value("title", ""),
          j.value("authors", std::vector<std::string>{}), j.value("year", 0), j.value("source_path", "")};
}

json CreepRecord::to_json(bool with_curve) const {
  json j{{"record_id", record_id},
         {"doi", doi},
         {"material", material},
         {"category", category},
         {"temperature_K", temperature_K},
         {"stress_MPa", stress_MPa},
         {"model_name", model_name},
         {"model", model},
         {"params_source", params_source},
         {"verdict", verdict},
         {"r2", r2 ? json(*r2) : json(nullptr)},
         {"figure_id", figure_id ? json(*figure_id) : json(nullptr)},
         {"text_locations", text_locations},
         {"n_points", curve.size()},
         {"report", report}};
  j["params"] = json::array();
  for (const auto& p : params) j["params"].push_back({{"name", p.name}, {"value", p.value}, {"unit", p.unit}});
  if (with_curve) {
    j["curve"] = json::array();
    for (const auto& c : curve) j["curve"].push_back({c.t, c.strain});
  }
  return j;
}

CreepRecord CreepRecord::from_json(const json& j) {
  CreepRecord r;
  r.record_id = j.value("record_id", std::int64_t{0});
  r.doi = j.at("doi").get<std::string>();
  r.material = j.value("material", "");
  r.category = j.value("category", "other");
  r.temperature_K = j.at("temperature_K").get<double>();
  r.stress_MPa = j.at("stress_MPa").get<double>();
  r.model_name = j.value("model_name", "");
  r.model = j.value("model", json::object());
  for (const auto& p : j.value("params", json::array()))
    r.params.push_back({p.at("name").get<std::string>(), p.at("value").get<double>(), p.value("unit", "")});
  r.params_source = j.value("params_source", "");
  for (const auto& c : j.value("curve", json::array())) r.curve.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  r.verdict = j.at("verdict").get<std::string>();
  if (j.contains("r2") && !j["r2"].is_null()) r.r2 = j["r2"].get<double>();
  if (j.contains("figure_id") && !j["figure_id"].is_null()) r.figure_id = j["figure_id"].get<std::string>();
  r.text_locations = j.value("text_locations", std::vector<std::string>{});
  r.report = j.value("report", json::object());
  return r;
}

void CreepRecord::check() const {
  auto violation = [](const std::string& m) { fail(ErrorCode::ConstraintViolation, m); };
  if (doi.empty()) violation("record has an empty DOI");
  if (!(temperature_K > 0.0) || !std::isfinite(temperature_K))
    violation("temperature must be > 0 K, got " + format_double(temperature_K));
  if (!(stress_MPa >= 0.0) || !std::isfinite(stress_MPa))
    violation("stress must be >= 0 MPa, got " + format_double(stress_MPa));
  if (!kRecordVerdicts.count(verdict)) violation("verdict '" + verdict + "' cannot be stored");
  if (!is_material_category(category)) violation("unknown material category '" + category + "'");
}

void RecordFilter::check() const {
  if (t_min_K && t_max_K)
    require(*t_min_K <= *t_max_K, "t_min_K must not exceed t_max_K");
  if (s_min_MPa && s_max_MPa)
    require(*s_min_MPa <= *s_max_MPa, "s_min_MPa must not exceed s_max_MPa");
  for (const auto* v : {&t_min_K, &t_max_K, &s_min_MPa, &s_max_MPa})
    if (*v) require(!std::isnan(**v), "range bounds must be numbers");
}

bool RecordFilter::matches(const CreepRecord& r) const {
  if (material && ascii_lower(r.material).find(ascii_lower(*material)) == std::string::npos) return false;
  if (category && r.category != *category) return false;
  if (t_min_K && r.temperature_K < *t_min_K) return false;
  if (t_max_K && r.temperature_K > *t_max_K) return false;
  if (s_min_MPa && r.stress_MPa < *s_min_MPa) return false;
  if (s_max_MPa && r.stress_MPa > *s_max_MPa) return false;
  if (!verdicts.empty() && !verdicts.count(r.verdict)) return false;
  return true;
}

json RejectedEntry::to_json() const {
  return {{"entry_id", entry_id}, {"bundle_id", bundle_id}, {"doi", doi},
          {"stage", stage},       {"reasons", reasons},     {"payload", payload}};
}

json AuditEvent::to_json() const {
  return {{"seq", seq},   {"record_id", record_id}, {"action", action}, {"from", from_verdict},
          {"to", to_verdict}, {"note", note},       {"timestamp", timestamp}};
}

ReviewAction review_action_from_string(const std::string& s) {
  if (s == "approve") return ReviewAction::Approve;
  if (s == "reject") return ReviewAction::Reject;
  fail(ErrorCode::Precondition, "action must be approve or reject, got '" + s + "'");
}

json Histogram::to_json() const {
  return {{"edges", edges}, {"counts", counts}, {"underflow", underflow}, {"overflow", overflow}};
}

Histogram make_histogram(const std::vector<double>& values, std::vector<double> edges) {
  require(edges.size() >= 2, "a histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) require(edges[i] > edges[i - 1], "histogram edges must increase");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (v < edges.front()) {
      ++h.underflow;
    } else if (v > edges.back()) {
      ++h.overflow;
    } else {
      auto it = std::upper_bound(edges.begin(), edges.end(), v);
      std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
      if (bin >= h.counts.size()) bin = h.counts.size() - 1;
      ++h.counts[bin];
    }
  }
  h.edges = std::move(edges);
  return h;
}

json Stats::to_json() const {
  json sc = json::object();
  for (const auto& [cat, pts] : scatter) {
    sc[cat] = json::array();
    for (const auto& [t, s] : pts) sc[cat].push_back({{"temperature_K", t}, {"stress_MPa", s}});
  }
  return {{"total", total},
          {"category_counts", category_counts},
          {"category_shares", category_shares},
          {"temperature_histogram", temperature.to_json()},
          {"stress_histogram", stress.to_json()},
          {"scatter", sc}};
}

// ---------------------------------------------------------------------------
// SQLite plumbing

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const std::string& sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.c_str(), -1, &stmt_, nullptr) != SQLITE_OK)
      fail(ErrorCode::StoreUnavailable, std::string("prepare failed: ") + sqlite3_errmsg(db));
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(stmt_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, double v) {
    sqlite3_bind_double(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(stmt_, i, v);
    return *this;
  }
  Stmt& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
  Stmt& bind_null(int i) {
    sqlite3_bind_null(stmt_, i);
    return *this;
  }
  template <class T>
  Stmt& bind(int i, const std::optional<T>& v) {
    return v ? bind(i, *v) : bind_null(i);
  }

  /// true when a row is available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if ((rc & 0xff) == SQLITE_CONSTRAINT)
      fail(ErrorCode::ConstraintViolation, std::string("constraint failed: ") + sqlite3_errmsg(db_));
    fail(ErrorCode::StoreUnavailable, std::string("step failed: ") + sqlite3_errmsg(db_));
  }
  void run() {
    while (step()) {
    }
  }

  std::string text(int col) const {
    auto p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col)) : std::string();
  }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }
  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  bool null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const std::string& sql) {
  char* err = nullptr;
  if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown";
    sqlite3_free(err);
    fail(ErrorCode::StoreUnavailable, "sql failed: " + msg);
  }
}

/// Commits on scope exit unless `commit()` was skipped by an exception.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

constexpr const char* kRecordColumns =
    "record_id, doi, material, category, temperature_K, stress_MPa, model_name, model_json, "
    "params_json, params_source, curve_json, verdict, r2, figure_id, text_locations_json, report_json";

json params_json(const std::vector<RecordParam>& params) {
  json j = json::array();
  for (const auto& p : params) j.push_back({{"name", p.name}, {"value", p.value}, {"unit", p.unit}});
  return j;
}

json curve_json(const std::vector<CurvePoint>& curve) {
  json j = json::array();
  for (const auto& c : curve) j.push_back({c.t, c.strain});
  return j;
}

CreepRecord record_from_row(const Stmt& s) {
  CreepRecord r;
  r.record_id = s.integer(0);
  r.doi = s.text(1);
  r.material = s.text(2);
  r.category = s.text(3);
  r.temperature_K = s.real(4);
  r.stress_MPa = s.real(5);
  r.model_name = s.text(6);
  r.model = json::parse(s.text(7));
  for (const auto& p : json::parse(s.text(8)))
    r.params.push_back({p["name"].get<std::string>(), p["value"].get<double>(), p["unit"].get<std::string>()});
  r.params_source = s.text(9);
  for (const auto& c : json::parse(s.text(10))) r.curve.push_back({c[0].get<double>(), c[1].get<double>()});
  r.verdict = s.text(11);
  if (!s.null(12)) r.r2 = s.real(12);
  if (!s.null(13)) r.figure_id = s.text(13);
  r.text_locations = json::parse(s.text(14)).get<std::vector<std::string>>();
  r.report = json::parse(s.text(15));
  return r;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Store

Store::Store(const std::string& path) : path_(path) {
  int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    fail(ErrorCode::StoreUnavailable, "cannot open store " + path + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  try {
    init_schema();
  } catch (...) {
    sqlite3_close(db_);
    db_ = nullptr;
    throw;
  }
}

Store::~Store() {
  if (db_) sqlite3_close(db_);
}

void Store::init_schema() {
  exec(db_, "PRAGMA foreign_keys = ON");
  exec(db_, R"sql(
    CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
    CREATE TABLE IF NOT EXISTS papers (
      doi TEXT PRIMARY KEY CHECK (length(doi) > 0),
      title TEXT NOT NULL,
      authors_json TEXT NOT NULL,
      year INTEGER NOT NULL,
      source_path TEXT NOT NULL);
    CREATE TABLE IF NOT EXISTS creep_records (
      record_id INTEGER PRIMARY KEY,
      doi TEXT NOT NULL REFERENCES papers(doi),
      material TEXT NOT NULL,
      category TEXT NOT NULL,
      temperature_K REAL NOT NULL CHECK (temperature_K > 0),
      stress_MPa REAL NOT NULL CHECK (stress_MPa >= 0),
      model_name TEXT NOT NULL,
      model_json TEXT NOT NULL,
      params_json TEXT NOT NULL,
      params_source TEXT NOT NULL,
      curve_json TEXT NOT NULL,
      verdict TEXT NOT NULL CHECK (verdict IN ('Valid', 'Valid-TextOnly', 'Flagged')),
      r2 REAL,
      figure_id TEXT,
      text_locations_json TEXT NOT NULL,
      report_json TEXT NOT NULL);
    CREATE INDEX IF NOT EXISTS creep_records_doi ON creep_records(doi, record_id);
    CREATE TABLE IF NOT EXISTS rejected_entries (
      entry_id INTEGER PRIMARY KEY,
      bundle_id TEXT NOT NULL,
      doi TEXT NOT NULL,
      stage TEXT NOT NULL,
      reasons_json TEXT NOT NULL,
      payload_json TEXT NOT NULL);
    CREATE TABLE IF NOT EXISTS audit_log (
      seq INTEGER PRIMARY KEY,
      record_id INTEGER NOT NULL,
      action TEXT NOT NULL,
      from_verdict TEXT NOT NULL,
      to_verdict TEXT NOT NULL,
      note TEXT NOT NULL,
      timestamp TEXT NOT NULL);
  )sql");
  Stmt get(db_, "SELECT value FROM meta WHERE key = 'schema_version'");
  if (get.step()) {
    if (get.text(0) != std::to_string(kSchemaVersion))
      fail(ErrorCode::StoreUnavailable, "store schema version " + get.text(0) + " is not supported");
  } else {
    Stmt(db_, "INSERT INTO meta (key, value) VALUES ('schema_version', ?)")
        .bind(1, std::to_string(kSchemaVersion))
        .run();
  }
}

void Store::insert_paper(const PaperRow& row) {
  std::lock_guard lock(mu_);
  require(!row.doi.empty(), "paper DOI is empty");
  if (paper_locked(row.doi)) fail(ErrorCode::DuplicateDoi, "paper " + row.doi + " already stored");
  Stmt(db_, "INSERT INTO papers (doi, title, authors_json, year, source_path) VALUES (?, ?, ?, ?, ?)")
      .bind(1, row.doi)
      .bind(2, row.title)
      .bind(3, json(row.authors).dump())
      .bind(4, row.year)
      .bind(5, row.source_path)
      .run();
}

void Store::ensure_paper(const PaperRow& row) {
  {
    std::lock_guard lock(mu_);
    if (auto existing = paper_locked(row.doi)) {
      if (!(*existing == row)) fail(ErrorCode::DuplicateDoi, "paper " + row.doi + " stored with other metadata");
      return;
    }
  }
  insert_paper(row);
}

std::optional<PaperRow> Store::paper_locked(const std::string& doi) const {
  Stmt s(db_, "SELECT doi, title, authors_json, year, source_path FROM papers WHERE doi = ?");
  s.bind(1, doi);
  if (!s.step()) return std::nullopt;
  return PaperRow{s.text(0), s.text(1), json::parse(s.text(2)).get<std::vector<std::string>>(),
                  static_cast<int>(s.integer(3)), s.text(4)};
}

std::optional<PaperRow> Store::paper(const std::string& doi) const {
  std::lock_guard lock(mu_);
  return paper_locked(doi);
}

std::vector<PaperRow> Store::papers() const {
  std::lock_guard lock(mu_);
  std::vector<PaperRow> out;
  Stmt s(db_, "SELECT doi FROM papers ORDER BY doi");
  std::vector<std::string> dois;
  while (s.step()) dois.push_back(s.text(0));
  for (const auto& d : dois) out.push_back(*paper_locked(d));
  return out;
}

std::int64_t Store::insert_record_locked(const CreepRecord& rec) {
  rec.check();
  if (!paper_locked(rec.doi)) fail(ErrorCode::UnknownDoi, "no paper with DOI " + rec.doi);
  if (rec.record_id > 0 && record_locked(rec.record_id))
    fail(ErrorCode::Conflict, "record id " + std::to_string(rec.record_id) + " is taken");
  Stmt s(db_, std::string("INSERT INTO creep_records (") + kRecordColumns +
                  ") VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)");
  if (rec.record_id > 0)
    s.bind(1, rec.record_id);
  else
    s.bind_null(1);
  s.bind(2, rec.doi)
      .bind(3, rec.material)
      .bind(4, rec.category)
      .bind(5, rec.temperature_K)
      .bind(6, rec.stress_MPa)
      .bind(7, rec.model_name)
      .bind(8, rec.model.dump())
      .bind(9, params_json(rec.params).dump())
      .bind(10, rec.params_source)
      .bind(11, curve_json(rec.curve).dump())
      .bind(12, rec.verdict)
      .bind(13, rec.r2)
      .bind(14, rec.figure_id)
      .bind(15, json(rec.text_locations).dump())
      .bind(16, rec.report.dump());
  s.run();
  return sqlite3_last_insert_rowid(db_);
}

std::int64_t Store::insert_record(const CreepRecord& rec) {
  std::lock_guard lock(mu_);
  return insert_record_locked(rec);
}

std::optional<CreepRecord> Store::record_locked(std::int64_t id) const {
  Stmt s(db_, std::string("SELECT ") + kRecordColumns + " FROM creep_records WHERE record_id = ?");
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return record_from_row(s);
}

std::optional<CreepRecord> Store::record(std::int64_t id) const {
  std::lock_guard lock(mu_);
  return record_locked(id);
}

std::vector<CreepRecord> Store::query(const RecordFilter& filter) const {
  filter.check();
  std::string sql = std::string("SELECT ") + kRecordColumns + " FROM creep_records WHERE 1";
  if (filter.material) sql += " AND instr(lower(material), ?) > 0";
  if (filter.category) sql += " AND category = ?";
  if (filter.t_min_K) sql += " AND temperature_K >= ?";
  if (filter.t_max_K) sql += " AND temperature_K <= ?";
  if (filter.s_min_MPa) sql += " AND stress_MPa >= ?";
  if (filter.s_max_MPa) sql += " AND stress_MPa <= ?";
  if (!filter.verdicts.empty()) {
    sql += " AND verdict IN (";
    for (std::size_t i = 0; i < filter.verdicts.size(); ++i) sql += i ? ", ?" : "?";
    sql += ")";
  }
  sql += " ORDER BY doi, record_id";

  std::lock_guard lock(mu_);
  Stmt s(db_, sql);
  int i = 1;
  if (filter.material) s.bind(i++, ascii_lower(*filter.material));
  if (filter.category) s.bind(i++, *filter.category);
  for (const auto* v : {&filter.t_min_K, &filter.t_max_K, &filter.s_min_MPa, &filter.s_max_MPa})
    if (*v) s.bind(i++, **v);
  for (const auto& v : filter.verdicts) s.bind(i++, v);
  std::vector<CreepRecord> out;
  while (s.step()) out.push_back(record_from_row(s));
  return out;
}

std::size_t Store::record_count() const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT count(*) FROM creep_records");
  s.step();
  return static_cast<std::size_t>(s.integer(0));
}

std::int64_t Store::insert_rejected(const RejectedEntry& entry) {
  std::lock_guard lock(mu_);
  Stmt(db_, "INSERT INTO rejected_entries (bundle_id, doi, stage, reasons_json, payload_json) VALUES (?, ?, ?, ?, ?)")
      .bind(1, entry.bundle_id)
      .bind(2, entry.doi)
      .bind(3, entry.stage)
      .bind(4, json(entry.reasons).dump())
      .bind(5, entry.payload.dump())
      .run();
  return sqlite3_last_insert_rowid(db_);
}

std::vector<RejectedEntry> Store::rejected() const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT entry_id, bundle_id, doi, stage, reasons_json, payload_json FROM rejected_entries ORDER BY entry_id");
  std::vector<RejectedEntry> out;
  while (s.step())
    out.push_back({s.integer(0), s.text(1), s.text(2), s.text(3),
                   json::parse(s.text(4)).get<std::vector<std::string>>(), json::parse(s.text(5))});
  return out;
}

CreepRecord Store::review(std::int64_t record_id, ReviewAction action, const std::string& note) {
  std::lock_guard lock(mu_);
  auto rec = record_locked(record_id);
  if (!rec) fail(ErrorCode::NotFound, "no record " + std::to_string(record_id));
  if (rec->verdict != "Flagged")
    fail(ErrorCode::Conflict, "record " + std::to_string(record_id) + " is " + rec->verdict + ", not Flagged");

  Transaction tx(db_);
  std::string to;
  if (action == ReviewAction::Approve) {
    to = "Valid";
    rec->verdict = to;
    rec->params_source = rec->params_source.empty() ? "human-approved" : rec->params_source + "+human-approved";
    Stmt(db_, "UPDATE creep_records SET verdict = ?, params_source = ? WHERE record_id = ?")
        .bind(1, rec->verdict)
        .bind(2, rec->params_source)
        .bind(3, record_id)
        .run();
  } else {
    to = "Rejected";
    json payload = rec->to_json();
    payload["review_note"] = note;
    Stmt(db_, "INSERT INTO rejected_entries (bundle_id, doi, stage, reasons_json, payload_json) VALUES (?, ?, 'review', ?, ?)")
        .bind(1, rec->report.value("bundle_id", std::string()))
        .bind(2, rec->doi)
        .bind(3, json({"ReviewRejected"}).dump())
        .bind(4, payload.dump())
        .run();
    Stmt(db_, "DELETE FROM creep_records WHERE record_id = ?").bind(1, record_id).run();
    rec->verdict = to;
  }
  Stmt(db_, "INSERT INTO audit_log (record_id, action, from_verdict, to_verdict, note, timestamp) VALUES (?, ?, 'Flagged', ?, ?, ?)")
      .bind(1, record_id)
      .bind(2, std::string(action == ReviewAction::Approve ? "approve" : "reject"))
      .bind(3, to)
      .bind(4, note)
      .bind(5, utc_now())
      .run();
  tx.commit();
  return *rec;
}

std::vector<AuditEvent> Store::audit_log() const {
  std::lock_guard lock(mu_);
  Stmt s(db_, "SELECT seq, record_id, action, from_verdict, to_verdict, note, timestamp FROM audit_log ORDER BY seq");
  std::vector<AuditEvent> out;
  while (s.step()) out.push_back({s.integer(0), s.integer(1), s.text(2), s.text(3), s.text(4), s.text(5), s.text(6)});
  return out;
}

std::vector<std::string> Store::audit_violations(double valid_threshold) const {
  std::vector<std::string> out;
  for (const auto& r : query()) {
    std::string id = "record " + std::to_string(r.record_id);
    if (!paper(r.doi)) out.push_back(id + ": DOI " + r.doi + " not in papers");
    bool evidence = (r.figure_id && !r.figure_id->empty()) || !r.text_locations.empty();
    bool human = r.params_source.find("human-approved") != std::string::npos;
    if (r.verdict == "Valid" || r.verdict == "Valid-TextOnly") {
      if (!evidence) out.push_back(id + ": Valid without evidence links");
      auto h = r.report.find("homogeneity");
      if (h != r.report.end() && h->is_object() && !h->value("pass", false))
        out.push_back(id + ": Valid with a failed homogeneity report");
    }
    if (r.verdict == "Valid" && !human && !(r.r2 && *r.r2 > valid_threshold))
      out.push_back(id + ": Valid with r2 not above " + format_double(valid_threshold));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

std::string curve_csv(const CreepRecord& rec) {
  std::string out = "time_s,strain\n";
  for (const auto& c : rec.curve) out += format_double(c.t) + "," + format_double(c.strain) + "\n";
  return out;
}

std::string Store::export_csv(const RecordFilter& filter) const {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : query(filter)) {
    std::string params;
    for (const auto& p : r.params) params += (params.empty() ? "" : ";") + p.name + "=" + format_double(p.value);
    out += std::to_string(r.record_id) + "," + csv_field(r.doi) + "," + csv_field(r.material) + "," +
           csv_field(r.category) + "," + format_double(r.temperature_K) + "," + format_double(r.stress_MPa) +
           "," + csv_field(r.model_name) + "," + csv_field(params) + "," + r.verdict + "," +
           (r.r2 ? format_double(*r.r2) : "") + "," + std::to_string(r.curve.size()) + "\n";
  }
  return out;
}

void Store::export_csv_files(const RecordFilter& filter, const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "curves");
  auto write = [](const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorCode::StoreUnavailable, "cannot write " + p.string());
    f << content;
  };
  write(fs::path(dir) / "records.csv", export_csv(filter));
  for (const auto& r : query(filter))
    write(fs::path(dir) / "curves" / ("record_" + std::to_string(r.record_id) + ".csv"), curve_csv(r));
}

json Store::export_data(const RecordFilter& filter) const {
  auto records = query(filter);
  std::set<std::string> dois;
  json recs = json::array();
  for (const auto& r : records) {
    dois.insert(r.doi);
    recs.push_back(r.to_json());
  }
  json papers_out = json::array();
  for (const auto& d : dois) papers_out.push_back(paper(d)->to_json());
  return {{"format", "creepdb-export"}, {"version", kExportVersion}, {"papers", papers_out}, {"records", recs}};
}

void Store::import_data(const json& data) {
  if (!data.is_object() || data.value("format", "") != "creepdb-export")
    fail(ErrorCode::Precondition, "not a creepdb export");
  if (data.value("version", 0) != kExportVersion)
    fail(ErrorCode::Precondition, "unsupported export version " + data.value("version", json(0)).dump());
  std::vector<PaperRow> papers_in;
  std::vector<CreepRecord> records_in;
  try {
    for (const auto& p : data.at("papers")) papers_in.push_back(PaperRow::from_json(p));
    for (const auto& r : data.at("records")) records_in.push_back(CreepRecord::from_json(r));
  } catch (const json::exception& e) {
    fail(ErrorCode::Precondition, std::string("malformed export: ") + e.what());
  }
  for (const auto& p : papers_in) ensure_paper(p);
  std::lock_guard lock(mu_);
  Transaction tx(db_);
  for (const auto& r : records_in) insert_record_locked(r);
  tx.commit();
}

Stats Store::stats(const RecordFilter& filter, const StatsOptions& options) const {
  Stats st;
  std::vector<double> temps, stresses;
  for (const auto& r : query(filter)) {
    ++st.total;
    ++st.category_counts[r.category];
    temps.push_back(r.temperature_K);
    stresses.push_back(r.stress_MPa);
    st.scatter[r.category].emplace_back(r.temperature_K, r.stress_MPa);
  }
  for (const auto& [cat, n] : st.category_counts)
    st.category_shares[cat] = static_cast<double>(n) / static_cast<double>(st.total);
  st.temperature = make_histogram(temps, options.temperature_edges);
  st.stress = make_histogram(stresses, options.stress_edges);
  return st;
}

}  // namespace creepdb::store
