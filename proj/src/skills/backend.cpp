#include "creepdb/skills/backend.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "creepdb/error.hpp"

namespace creepdb::skills {

nlohmann::json BackendRequest::to_json() const {
  return {{"key", key},   {"skill", skill},           {"instruction", instruction},
          {"context", context}, {"tools", tools},     {"schema", schema},
          {"call_index", call_index}, {"tool_results", tool_results}};
}

ScriptedBackend::ScriptedBackend(nlohmann::json fixture) {
  require(fixture.is_object() && fixture.value("version", 0) == 1,
          "scripted fixture must be an object with version 1");
  require(fixture.contains("responses") && fixture["responses"].is_object(),
          "scripted fixture needs a 'responses' object");
  responses_ = std::move(fixture["responses"]);
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingAsset, "cannot open scripted fixture " + path);
  try {
    return std::make_unique<ScriptedBackend>(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Precondition, "malformed scripted fixture " + path + ": " + e.what());
  }
}

std::string ScriptedBackend::complete(const BackendRequest& request) {
  auto doc = responses_.find(request.key);
  if (doc == responses_.end())
    fail(ErrorCode::BackendFailure, "no scripted replies for '" + request.key + "'");
  auto replies = doc->find(request.skill);
  if (replies == doc->end() || !replies->is_array() || replies->empty())
    fail(ErrorCode::BackendFailure,
         "no scripted replies for '" + request.key + "' / " + request.skill);
  const auto& reply = (*replies)[std::min(request.call_index, replies->size() - 1)];
  if (reply.is_object() && reply.size() == 1 && reply.contains("fail"))
    fail(ErrorCode::BackendFailure, reply["fail"].is_string() ? reply["fail"].get<std::string>()
                                                              : reply["fail"].dump());
  return reply.is_string() ? reply.get<std::string>() : reply.dump();
}

std::string EchoBackend::complete(const BackendRequest& request) { return request.context.dump(); }

HttpBackend::HttpBackend(std::string url, double timeout_s, std::string token)
    : url_(std::move(url)), timeout_s_(timeout_s), token_(std::move(token)) {
  auto scheme = url_.find("://");
  require(scheme != std::string::npos, "backend URL needs a scheme: " + url_);
  auto slash = url_.find('/', scheme + 3);
  origin_ = slash == std::string::npos ? url_ : url_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url_.substr(slash);
  require(timeout_s_ > 0.0, "backend timeout must be positive");
}

std::string HttpBackend::complete(const BackendRequest& request) {
  httplib::Client client(origin_);
  auto secs = static_cast<time_t>(timeout_s_);
  auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = client.Post(path_, headers, request.to_json().dump(), "application/json");
  if (!res) fail(ErrorCode::BackendFailure, "backend " + url_ + " unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    fail(ErrorCode::BackendFailure, "backend " + url_ + " answered HTTP " + std::to_string(res->status));
  auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_object() && body.contains("text") && body["text"].is_string()) return body["text"].get<std::string>();
  return res->body;
}

std::unique_ptr<ReasoningBackend> make_backend(const std::string& spec, double timeout_s) {
  if (spec.rfind("scripted:", 0) == 0) return ScriptedBackend::from_file(spec.substr(9));
  if (spec == "echo") return std::make_unique<EchoBackend>();
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    const char* token = std::getenv(kBackendTokenEnv);
    return std::make_unique<HttpBackend>(spec, timeout_s, token ? token : "");
  }
  fail(ErrorCode::Precondition, "unknown backend '" + spec + "' (expected scripted:<path>, echo or a URL)");
}

}  // namespace creepdb::skills
