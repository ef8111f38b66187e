#include "creepdb/app/http.hpp"

#include <charconv>
#include <regex>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "creepdb/error.hpp"
#include "creepdb/text.hpp"

namespace creepdb::app {

using nlohmann::json;

namespace {

const std::vector<std::string> kFilterFields = {"material", "category",  "t_min_K", "t_max_K",
                                                "s_min_MPa", "s_max_MPa", "verdict"};

std::optional<std::string> single(const QueryParams& params, const std::string& key) {
  auto [lo, hi] = params.equal_range(key);
  if (lo == hi) return std::nullopt;
  std::string joined;
  for (auto it = lo; it != hi; ++it) {
    if (!joined.empty()) joined += ',';
    joined += it->second;
  }
  return joined;
}

double number(const std::string& field, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    fail(ErrorCode::Precondition, field + ": '" + text + "' is not a number");
  return v;
}

std::size_t count(const std::string& field, const std::string& text) {
  std::size_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end)
    fail(ErrorCode::Precondition, field + ": '" + text + "' is not a non-negative integer");
  return v;
}

HttpResponse json_response(const json& j, int status = 200) {
  HttpResponse r;
  r.status = status;
  r.body = j.dump();
  return r;
}

HttpResponse error_response(const Error& e) {
  json body{{"error", std::string(to_string(e.code()))}, {"message", e.detail()}};
  for (const auto& f : kFilterFields) {
    if (e.detail().rfind(f, 0) == 0) {
      body["field"] = f;
      break;
    }
  }
  for (const std::string f : {"limit", "offset", "record_id", "action"})
    if (e.detail().rfind(f, 0) == 0) body["field"] = f;
  return json_response(body, status_for(e.code()));
}

std::int64_t record_id_of(const std::string& text) {
  std::int64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end)
    fail(ErrorCode::NotFound, "record_id: no record '" + text + "'");
  return v;
}

}  // namespace

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Precondition:
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDoi:
      return 404;
    case ErrorCode::Conflict:
      return 409;
    default:
      return 500;
  }
}

store::RecordFilter filter_from_params(const QueryParams& params) {
  store::RecordFilter f;
  if (auto v = single(params, "material"); v && !v->empty()) f.material = *v;
  if (auto v = single(params, "category"); v && !v->empty()) f.category = *v;
  if (auto v = single(params, "t_min_K")) f.t_min_K = number("t_min_K", *v);
  if (auto v = single(params, "t_max_K")) f.t_max_K = number("t_max_K", *v);
  if (auto v = single(params, "s_min_MPa")) f.s_min_MPa = number("s_min_MPa", *v);
  if (auto v = single(params, "s_max_MPa")) f.s_max_MPa = number("s_max_MPa", *v);
  if (auto v = single(params, "verdict")) {
    std::size_t start = 0;
    while (start <= v->size()) {
      auto comma = v->find(',', start);
      std::string item = v->substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) {
        if (!store::kRecordVerdicts.count(item))
          fail(ErrorCode::Precondition, "verdict: unknown verdict '" + item + "'");
        f.verdicts.insert(item);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  f.check();
  return f;
}

HttpResponse ApiService::handle(const std::string& method, const std::string& path, const QueryParams& params,
                                const std::string& body) const {
  static const std::regex curve_re("^/api/records/([^/]+)/curve$");
  static const std::regex paper_re("^/api/papers/(.+)$");
  try {
    std::smatch m;
    if (method == "GET") {
      if (path == "/api/records") return get_records(params);
      if (std::regex_match(path, m, curve_re)) return get_curve(m[1].str());
      if (std::regex_match(path, m, paper_re)) return get_paper(m[1].str());
      if (path == "/api/stats") return get_stats(params);
      if (path == "/api/export.csv") return get_export("csv", params);
      if (path == "/api/export.data") return get_export("data", params);
    } else if (method == "POST" && path == "/api/review") {
      return post_review(body);
    }
    return json_response({{"error", "NotFound"}, {"message", "no route " + method + " " + path}}, 404);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return json_response({{"error", "Internal"}, {"message", e.what()}}, 500);
  }
}

HttpResponse ApiService::get_records(const QueryParams& params) const {
  auto filter = filter_from_params(params);
  std::size_t offset = 0;
  std::optional<std::size_t> limit;
  if (auto v = single(params, "offset")) offset = count("offset", *v);
  if (auto v = single(params, "limit")) limit = count("limit", *v);
  auto records = store_.query(filter);
  json out = json::array();
  for (std::size_t i = offset; i < records.size() && (!limit || out.size() < *limit); ++i)
    out.push_back(records[i].to_json(false));
  auto r = json_response(out);
  r.headers["X-Total-Count"] = std::to_string(records.size());
  return r;
}

HttpResponse ApiService::get_curve(const std::string& id) const {
  auto rec = store_.record(record_id_of(id));
  if (!rec) fail(ErrorCode::NotFound, "record_id: no record " + id);
  json t = json::array(), s = json::array();
  for (const auto& p : rec->curve) {
    t.push_back(p.t);
    s.push_back(p.strain);
  }
  return json_response({{"record_id", rec->record_id},
                        {"material", rec->material},
                        {"verdict", rec->verdict},
                        {"time_unit", "s"},
                        {"strain_unit", "1"},
                        {"time_s", t},
                        {"strain", s}});
}

HttpResponse ApiService::get_paper(const std::string& doi) const {
  auto paper = store_.paper(doi);
  if (!paper) fail(ErrorCode::NotFound, "doi: no paper " + doi);
  json ids = json::array();
  for (const auto& rec : store_.query({}))
    if (rec.doi == doi) ids.push_back(rec.record_id);
  json j = paper->to_json();
  j["record_ids"] = ids;
  return json_response(j);
}

HttpResponse ApiService::get_stats(const QueryParams& params) const {
  return json_response(store_.stats(filter_from_params(params)).to_json());
}

HttpResponse ApiService::get_export(const std::string& format, const QueryParams& params) const {
  auto filter = filter_from_params(params);
  HttpResponse r;
  if (format == "csv") {
    r.content_type = "text/csv";
    r.body = store_.export_csv(filter);
    r.headers["Content-Disposition"] = "attachment; filename=\"creepdb_records.csv\"";
  } else {
    r.body = store_.export_data(filter).dump(2) + "\n";
    r.headers["Content-Disposition"] = "attachment; filename=\"creepdb_export.json\"";
  }
  return r;
}

HttpResponse ApiService::post_review(const std::string& body) const {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::Precondition, std::string("body is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::Precondition, "body must be an object");
  if (!j.contains("record_id") || !j["record_id"].is_number_integer())
    fail(ErrorCode::Precondition, "record_id: required integer");
  if (!j.contains("action") || !j["action"].is_string()) fail(ErrorCode::Precondition, "action: required string");
  std::string note;
  if (j.contains("note")) {
    if (!j["note"].is_string()) fail(ErrorCode::Precondition, "note: must be a string");
    note = j["note"].get<std::string>();
  }
  store::ReviewAction action;
  try {
    action = store::review_action_from_string(j["action"].get<std::string>());
  } catch (const Error& e) {
    fail(ErrorCode::Precondition, "action: " + e.detail());
  }
  auto rec = store_.review(j["record_id"].get<std::int64_t>(), action, note);
  return json_response(rec.to_json(false));
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  explicit Impl(store::Store& s) : api(s) {}
  ApiService api;
  httplib::Server server;
};

HttpServer::HttpServer(store::Store& store) : impl_(std::make_unique<Impl>(store)) {
  auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams params(req.params.begin(), req.params.end());
    auto r = impl_->api.handle(req.method, req.path, params, req.body);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get(R"(/api/.*)", bridge);
  impl_->server.Post(R"(/api/.*)", bridge);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int p = impl_->server.bind_to_any_port(host);
    if (p < 0) fail(ErrorCode::Precondition, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port))
    fail(ErrorCode::Precondition, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }
void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}
void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace creepdb::app
