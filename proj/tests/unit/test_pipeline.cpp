#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "creepdb/digitizer/image.hpp"
#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"
#include "creepdb/pipeline/pipeline.hpp"
#include "creepdb/skills/backend.hpp"
#include "fixture_corpus.hpp"

using namespace creepdb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = CREEPDB_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FixtureRun {
  pipeline::PipelineReport report;
  std::string csv;
};

FixtureRun run_fixture(pipeline::PipelineConfig config = pipeline::PipelineConfig::load(kFixtures + "/config.json")) {
  auto index = corpus::ingest_manifest(kFixtures + "/manifest.jsonl");
  auto backend = skills::make_backend(config.backend);
  store::Store db(":memory:");
  auto report = pipeline::run_pipeline(index, config, *backend, db);
  return {report, db.export_csv({})};
}

const pipeline::DocumentTrace& trace_of(const pipeline::PipelineReport& r, const std::string& id) {
  for (const auto& t : r.traces)
    if (t.bundle_id == id) return t;
  FAIL("no trace for " << id);
  throw 0;
}

}  // namespace

TEST_CASE("checked-in fixtures match the generator") {
  auto files = fixtures::generate_fixture_corpus();
  for (const auto& [rel, content] : files) {
    CAPTURE(rel);
    fs::path p = fs::path(kFixtures) / rel;
    REQUIRE(fs::exists(p));
    if (p.extension() == ".png") {
      auto tmp = fs::temp_directory_path() / "creepdb_fixture_check.png";
      std::ofstream(tmp, std::ios::binary) << content;
      auto fresh = digitizer::read_png(tmp.string());
      auto stored = digitizer::read_png(p.string());
      fs::remove(tmp);
      REQUIRE(fresh.width() == stored.width());
      REQUIRE(fresh.height() == stored.height());
      bool same = true;
      for (int y = 0; y < fresh.height() && same; ++y)
        for (int x = 0; x < fresh.width() && same; ++x) same = fresh.at(x, y) == stored.at(x, y);
      CHECK(same);
    } else {
      CHECK(slurp(p) == content);
    }
  }
}

TEST_CASE("fixture corpus runs end to end") {
  auto run = run_fixture();
  const auto& r = run.report;
  INFO(r.summary());
  CHECK(r.collected == 6);
  CHECK(r.screened_pass == 5);
  CHECK(r.screened_fail == 1);
  CHECK(r.extracted == 5);
  CHECK(r.validated_valid == 4);
  CHECK(r.validated_flagged + r.validated_rejected == 1);
  CHECK(r.stored == 4);
  CHECK(r.funnel_holds());

  CHECK(trace_of(r, "d6").terminal == "rejected-at-screening");
  CHECK(trace_of(r, "d5").terminal == "flagged");
  for (std::string id : {"d1", "d2", "d3", "d4"}) {
    CAPTURE(id);
    CHECK(trace_of(r, id).terminal == "stored");
    CHECK(trace_of(r, id).record_id.has_value());
  }
}

TEST_CASE("fixture records carry the expected verdicts and provenance") {
  auto index = corpus::ingest_manifest(kFixtures + "/manifest.jsonl");
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  auto backend = skills::make_backend(config.backend);
  store::Store db(":memory:");
  pipeline::run_pipeline(index, config, *backend, db);

  auto records = db.query({});
  REQUIRE(records.size() == 5);
  std::map<std::string, store::CreepRecord> by_material;
  for (const auto& rec : records) {
    by_material[rec.material] = rec;
    CHECK(db.paper(rec.doi).has_value());
    CHECK_FALSE(rec.text_locations.empty());
  }
  CHECK(by_material.at("X46Cr13").verdict == "Valid");
  CHECK(by_material.at("X46Cr13").temperature_K == doctest::Approx(873.15));
  CHECK(by_material.at("X46Cr13").stress_MPa == doctest::Approx(31.6));
  CHECK(by_material.at("CMSX-4").verdict == "Valid");
  CHECK(by_material.at("AMAG-183").verdict == "Valid");
  CHECK(by_material.at("AMAG-183").stress_MPa == doctest::Approx(1200));
  CHECK(by_material.at("HDPE").params_source == "mixed");
  CHECK(by_material.at("polycrystalline ice").verdict == "Flagged");
  for (const auto& rec : records) {
    CAPTURE(rec.material);
    REQUIRE(rec.r2.has_value());
    if (rec.verdict == "Valid") CHECK(*rec.r2 > 0.9);
  }

  // The nickel fit recovers the hourly rate constant from text.
  for (const auto& p : by_material.at("CMSX-4").params)
    if (p.name == "theta2") CHECK(p.value == doctest::Approx(0.036 / 3600).epsilon(1e-9));
}

TEST_CASE("two runs produce byte-identical exports") {
  auto a = run_fixture();
  auto b = run_fixture();
  CHECK(a.csv == b.csv);
  CHECK(a.report.summary() == b.report.summary());
  CHECK_FALSE(a.csv.empty());
}

TEST_CASE("serial and parallel runs agree") {
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  config.max_in_flight = 1;
  auto serial = run_fixture(config);
  config.max_in_flight = 6;
  auto parallel = run_fixture(config);
  CHECK(serial.csv == parallel.csv);
}

TEST_CASE("skills only execute tools in their scope") {
  auto run = run_fixture();
  auto personas = skills::default_personas();
  std::map<std::string, const skills::Skill*> by_name{{personas.navigator.name, &personas.navigator},
                                                      {personas.filter.name, &personas.filter},
                                                      {personas.parser.name, &personas.parser},
                                                      {personas.guardrail.name, &personas.guardrail},
                                                      {personas.serializer.name, &personas.serializer}};
  REQUIRE_FALSE(run.report.executed_tools.empty());
  for (const auto& [skill, tools] : run.report.executed_tools) {
    CAPTURE(skill);
    REQUIRE(by_name.count(skill));
    for (const auto& t : tools) {
      CAPTURE(t);
      CHECK(by_name.at(skill)->allowed_tools.count(t) == 1);
    }
  }
  CHECK(run.report.executed_tools.at(personas.parser.name).count("read_full_text") == 1);
  CHECK(run.report.executed_tools.at(personas.parser.name).count("digitize_figure") == 1);
  CHECK(run.report.executed_tools.at(personas.guardrail.name).count("physics_validation") == 1);
  CHECK(run.report.executed_tools.at(personas.serializer.name).count("store_insert") == 1);
}

TEST_CASE("query collection goes through the navigator") {
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  config.query = "creep of steels and superalloys";
  auto run = run_fixture(config);
  CHECK(run.report.collected == 2);  // d1 (steel) and d2 (superalloy)
  CHECK(run.report.stored == 2);
  CHECK(run.report.executed_tools.at("Bibliographic Navigator").count("corpus_search") == 1);
}

TEST_CASE("rejected documents land in the rejected table, dry runs store nothing") {
  auto index = corpus::ingest_manifest(kFixtures + "/manifest.jsonl");
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  config.store_enabled = false;
  auto backend = skills::make_backend(config.backend);
  store::Store db(":memory:");
  auto report = pipeline::run_pipeline(index, config, *backend, db);
  CHECK(report.stored == 0);
  CHECK(db.record_count() == 0);
  CHECK(trace_of(report, "d1").terminal == "not-stored");
  CHECK(report.funnel_holds());
}

TEST_CASE("disabling screening passes every collected document") {
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  config.screen_enabled = false;
  auto run = run_fixture(config);
  CHECK(run.report.screened_pass == 6);
  CHECK(run.report.funnel_holds());
  // d6 has no parser reply, so extraction fails there.
  CHECK(trace_of(run.report, "d6").terminal == "failed");
}

TEST_CASE("empty corpus yields an all-zero report") {
  corpus::CorpusIndex index;
  pipeline::PipelineConfig config;
  skills::EchoBackend backend;
  store::Store db(":memory:");
  auto r = pipeline::run_pipeline(index, config, backend, db);
  CHECK(r.collected == 0);
  CHECK(r.stored == 0);
  CHECK(r.traces.empty());
  CHECK(r.funnel_holds());
}

TEST_CASE("a backend outage on one document does not stop the others") {
  auto fixture = json::parse(slurp(kFixtures + "/replies.json"));
  fixture["responses"]["d2"]["Domain Filter"] = json::array({json{{"fail", "connection reset"}}});
  skills::ScriptedBackend backend(fixture);
  auto index = corpus::ingest_manifest(kFixtures + "/manifest.jsonl");
  auto config = pipeline::PipelineConfig::load(kFixtures + "/config.json");
  store::Store db(":memory:");
  auto r = pipeline::run_pipeline(index, config, backend, db);
  CHECK(trace_of(r, "d2").terminal == "failed");
  CHECK(trace_of(r, "d2").error_code == "BackendFailure");
  CHECK(r.stored == 3);
  CHECK(r.funnel_holds());
}

TEST_CASE("config parsing") {
  SUBCASE("defaults") {
    pipeline::PipelineConfig c;
    CHECK(c.screen_enabled);
    CHECK(c.store_enabled);
    CHECK(c.max_in_flight >= 1);
    CHECK_NOTHROW(c.check());
  }
  SUBCASE("scripted fixture resolves against the config directory") {
    auto c = pipeline::PipelineConfig::load(kFixtures + "/config.json");
    CHECK(c.backend == "scripted:" + (fs::path(kFixtures) / "replies.json").lexically_normal().string());
    CHECK(c.max_in_flight == 3);
  }
  SUBCASE("unknown keys are rejected") {
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json(json{{"version", 1}, {"bogus", 1}}, "."), Error);
  }
  SUBCASE("bad thresholds are rejected") {
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json(
                        json{{"version", 1}, {"thresholds", {{"valid", 0.4}, {"review", 0.5}}}}, "."),
                    Error);
  }
  SUBCASE("round trip") {
    pipeline::PipelineConfig c;
    c.max_in_flight = 7;
    c.query = "creep AND steel";
    c.thresholds.valid = 0.95;
    auto back = pipeline::PipelineConfig::from_json(c.to_json(), ".");
    CHECK(back.max_in_flight == 7);
    CHECK(back.query == c.query);
    CHECK(back.thresholds.valid == 0.95);
  }
  SUBCASE("environment variable supplies the path") {
    ::setenv("CREEPDB_CONFIG", (kFixtures + "/config.json").c_str(), 1);
    auto c = pipeline::resolve_config(std::nullopt);
    ::unsetenv("CREEPDB_CONFIG");
    CHECK(c.max_in_flight == 3);
    auto d = pipeline::resolve_config(std::nullopt);
    CHECK(d.max_in_flight == pipeline::PipelineConfig{}.max_in_flight);
  }
}

TEST_CASE("shipped data tables match the built-in ones") {
  const std::string data = CREEPDB_DATA_DIR;
  CHECK(json::parse(slurp(data + "/catalog.json")) == models::builtin_catalog().to_json());
  CHECK(json::parse(slurp(data + "/units.json")) == formula::unit_table_json());

  pipeline::PipelineConfig config;
  config.catalog_path = data + "/catalog.json";
  auto loaded = pipeline::load_catalog(config);
  CHECK(loaded.to_json() == models::builtin_catalog().to_json());
}
