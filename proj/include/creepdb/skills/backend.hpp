#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace creepdb::skills {

struct BackendRequest {
  /// Document id, or "query:<text>" for query expansion.
  std::string key;
  std::string skill;
  std::string instruction;
  nlohmann::json context = nlohmann::json::object();
  std::vector<std::string> tools;
  std::string schema;
  /// Zero-based index of this call within one skill invocation.
  std::size_t call_index = 0;
  /// Results of tool calls made earlier in the same invocation.
  nlohmann::json tool_results = nlohmann::json::array();

  nlohmann::json to_json() const;
};

/// Request -> raw text. Implementations throw BackendFailure when the
/// service cannot answer. Must be safe to call from several threads.
class ReasoningBackend {
 public:
  virtual ~ReasoningBackend() = default;
  virtual std::string complete(const BackendRequest& request) = 0;
  virtual std::string describe() const = 0;
};

/// Replays canned replies from a fixture:
///   {"version": 1, "responses": {key: {skill: [reply, ...]}}}
/// The reply at call_index is returned (the last one once exhausted). A
/// reply is raw text when it is a string, the serialized value otherwise,
/// and {"fail": "..."} simulates a backend outage.
class ScriptedBackend : public ReasoningBackend {
 public:
  explicit ScriptedBackend(nlohmann::json fixture);
  static std::unique_ptr<ScriptedBackend> from_file(const std::string& path);

  std::string complete(const BackendRequest& request) override;
  std::string describe() const override { return "scripted"; }

 private:
  nlohmann::json responses_;
};

/// Returns the request context serialized as JSON.
class EchoBackend : public ReasoningBackend {
 public:
  std::string complete(const BackendRequest& request) override;
  std::string describe() const override { return "echo"; }
};

/// POSTs the request as JSON to a remote completion service. The reply body
/// is either {"text": "..."} or the raw completion.
class HttpBackend : public ReasoningBackend {
 public:
  HttpBackend(std::string url, double timeout_s, std::string token = {});

  std::string complete(const BackendRequest& request) override;
  std::string describe() const override { return url_; }

 private:
  std::string url_;
  std::string origin_;
  std::string path_;
  double timeout_s_;
  std::string token_;
};

inline constexpr const char* kBackendTokenEnv = "CREEPDB_BACKEND_TOKEN";

/// "scripted:<path>", "echo", or an http(s) URL. The HTTP token is read
/// from CREEPDB_BACKEND_TOKEN.
std::unique_ptr<ReasoningBackend> make_backend(const std::string& spec, double timeout_s = 30.0);

}  // namespace creepdb::skills
