#include "creepdb/pipeline/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "creepdb/error.hpp"

namespace creepdb::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::check() const {
  require(max_in_flight >= 1, "max_in_flight must be at least 1");
  require(max_retries >= 0 && max_retries <= 10, "max_retries must be within 0..10");
  require(backend_timeout_s > 0, "backend timeout must be positive");
  require(digitizer_tolerance >= 0 && digitizer_tolerance <= 255, "digitizer tolerance must be within 0..255");
  thresholds.check();
}

json PipelineConfig::to_json() const {
  json j{{"version", kConfigVersion},
         {"stages", {{"screen", screen_enabled}, {"store", store_enabled}}},
         {"max_in_flight", max_in_flight},
         {"max_retries", max_retries},
         {"thresholds",
          {{"valid", thresholds.valid},
           {"review", thresholds.review},
           {"strain_min", thresholds.strain_min},
           {"strain_max", thresholds.strain_max}}},
         {"backend", {{"endpoint", backend}, {"timeout_s", backend_timeout_s}}},
         {"lenient_query", lenient_query},
         {"digitizer", {{"tolerance", digitizer_tolerance}, {"min_pixels", digitizer_min_pixels}}},
         {"instructions", instructions}};
  j["query"] = query ? json(*query) : json(nullptr);
  j["catalog"] = catalog_path ? json(*catalog_path) : json(nullptr);
  return j;
}

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), where + " must be an object");
  for (const auto& [k, _] : j.items())
    require(allowed.count(k) > 0, "unknown config key '" + where + k + "'");
}

std::string resolve(const std::string& p, const std::string& base) {
  if (base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const std::string& base_dir) {
  only_keys(j, {"version", "stages", "max_in_flight", "max_retries", "thresholds", "backend", "scripted_fixture",
                "query", "lenient_query", "digitizer", "catalog", "instructions"},
            "");
  require(j.value("version", kConfigVersion) == kConfigVersion,
          "config version must be " + std::to_string(kConfigVersion));
  PipelineConfig c;
  try {
    if (j.contains("stages")) {
      only_keys(j["stages"], {"screen", "store"}, "stages.");
      c.screen_enabled = j["stages"].value("screen", true);
      c.store_enabled = j["stages"].value("store", true);
    }
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.max_retries = j.value("max_retries", c.max_retries);
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      only_keys(t, {"valid", "review", "strain_min", "strain_max"}, "thresholds.");
      c.thresholds.valid = t.value("valid", c.thresholds.valid);
      c.thresholds.review = t.value("review", c.thresholds.review);
      c.thresholds.strain_min = t.value("strain_min", c.thresholds.strain_min);
      c.thresholds.strain_max = t.value("strain_max", c.thresholds.strain_max);
    }
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      only_keys(b, {"endpoint", "timeout_s"}, "backend.");
      c.backend = b.value("endpoint", c.backend);
      c.backend_timeout_s = b.value("timeout_s", c.backend_timeout_s);
    }
    if (j.contains("scripted_fixture") && !j["scripted_fixture"].is_null())
      c.backend = "scripted:" + resolve(j["scripted_fixture"].get<std::string>(), base_dir);
    else if (c.backend.rfind("scripted:", 0) == 0)
      c.backend = "scripted:" + resolve(c.backend.substr(9), base_dir);
    if (j.contains("query") && !j["query"].is_null()) c.query = j["query"].get<std::string>();
    c.lenient_query = j.value("lenient_query", false);
    if (j.contains("digitizer")) {
      only_keys(j["digitizer"], {"tolerance", "min_pixels"}, "digitizer.");
      c.digitizer_tolerance = j["digitizer"].value("tolerance", c.digitizer_tolerance);
      c.digitizer_min_pixels = j["digitizer"].value("min_pixels", c.digitizer_min_pixels);
    }
    if (j.contains("catalog") && !j["catalog"].is_null())
      c.catalog_path = resolve(j["catalog"].get<std::string>(), base_dir);
    c.instructions = j.value("instructions", c.instructions);
  } catch (const json::exception& e) {
    fail(ErrorCode::Precondition, std::string("config has a mistyped value: ") + e.what());
  }
  c.check();
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingAsset, "cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::Precondition, "config " + path + " is not valid JSON");
  return from_json(j, fs::path(path).parent_path().string());
}

PipelineConfig resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return PipelineConfig::load(*explicit_path);
  if (const char* env = std::getenv(kConfigEnv); env && *env) return PipelineConfig::load(env);
  return PipelineConfig{};
}

}  // namespace creepdb::pipeline
