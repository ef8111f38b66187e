#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "creepdb/validator/validator.hpp"

namespace creepdb::pipeline {

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kConfigEnv = "CREEPDB_CONFIG";

struct PipelineConfig {
  /// screen=false passes every collected document; store=false is a dry run.
  bool screen_enabled = true;
  bool store_enabled = true;
  std::size_t max_in_flight = 4;
  int max_retries = 2;
  validator::Thresholds thresholds;
  /// Backend spec: "echo", "scripted:<path>" or an http(s) URL.
  std::string backend = "echo";
  double backend_timeout_s = 30.0;
  /// Natural-language collection query; every indexed document when absent.
  std::optional<std::string> query;
  bool lenient_query = false;
  int digitizer_tolerance = 30;
  std::size_t digitizer_min_pixels = 20;
  std::optional<std::string> catalog_path;
  std::map<std::string, std::string> instructions;

  /// Throws Precondition on an out-of-range value.
  void check() const;
  nlohmann::json to_json() const;
  /// Unknown keys are rejected. Relative paths (scripted fixture, catalog)
  /// resolve against `base_dir` when it is non-empty.
  static PipelineConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
  static PipelineConfig load(const std::string& path);
};

/// `explicit_path`, else $CREEPDB_CONFIG, else defaults.
PipelineConfig resolve_config(const std::optional<std::string>& explicit_path);

}  // namespace creepdb::pipeline
