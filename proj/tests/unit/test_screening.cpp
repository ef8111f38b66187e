#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "creepdb/error.hpp"
#include "creepdb/screening/screen.hpp"
#include "creepdb/skills/personas.hpp"

using namespace creepdb;
using namespace creepdb::screening;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Precondition;
}

ConfusionCounts counts(std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
  ConfusionCounts c;
  c.tp = tp;
  c.fp = fp;
  c.tn = tn;
  c.fn = fn;
  return c;
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("decision pass is the conjunction of the evidence flags") {
  for (bool d : {false, true})
    for (bool e : {false, true}) {
      ScreeningDecision s("b", d, e);
      CHECK(s.pass() == (d && e));
      if (!s.pass()) CHECK_FALSE(s.rationale().empty());
    }
  CHECK(ScreeningDecision("b", true, false).rationale() == "no constitutive equation");
  CHECK(ScreeningDecision("b", false, true, "theory only").rationale() == "theory only");
  CHECK(ScreeningDecision("b", true, true).to_json()["pass"] == true);
}

TEST_CASE("metric examples") {
  auto c = counts(8, 1, 10, 1);
  CHECK(std::abs(precision(c) - 8.0 / 9.0) < 1e-12);
  CHECK(std::abs(precision(c) - 0.8889) < 1e-4);
  CHECK(std::abs(recall(c) - 0.8889) < 1e-4);
  CHECK(std::abs(f1(c) - 0.8889) < 1e-4);
  CHECK(accuracy(c) == 0.9);
  CHECK(precision(counts(10, 0, 0, 0)) == 1.0);
  auto perfect = counts(10, 0, 10, 0);
  CHECK(precision(perfect) == 1.0);
  CHECK(recall(perfect) == 1.0);
  CHECK(f1(perfect) == 1.0);
  CHECK(accuracy(perfect) == 1.0);
  CHECK(f1(1.0, 0.0) == 0.0);
  CHECK(code_of([] { precision(counts(0, 0, 4, 1)); }) == ErrorCode::UndefinedMetric);
  CHECK(code_of([] { recall(counts(0, 2, 4, 0)); }) == ErrorCode::UndefinedMetric);
  CHECK(code_of([] { accuracy(counts(0, 0, 0, 0)); }) == ErrorCode::UndefinedMetric);
  CHECK(code_of([] { f1(counts(0, 2, 4, 3)); }) == ErrorCode::UndefinedMetric);
}

TEST_CASE("confusion tallies") {
  std::vector<ScreeningDecision> all_pass;
  std::map<std::string, bool> yes, no;
  for (int i = 0; i < 5; ++i) {
    all_pass.emplace_back("d" + std::to_string(i), true, true);
    yes["d" + std::to_string(i)] = true;
    if (i < 3) no["d" + std::to_string(i)] = false;
  }
  auto c = confusion(all_pass, yes);
  CHECK(c.tp == 5);
  CHECK(c.fp + c.tn + c.fn == 0);
  std::vector<ScreeningDecision> three(all_pass.begin(), all_pass.begin() + 3);
  CHECK(confusion(three, no).fp == 3);
  CHECK(code_of([&] { confusion(all_pass, no); }) == ErrorCode::MissingTruth);

  // 20-document fixture tallied by hand: decisions and truth laid out so
  // that tp=8, fp=1, fn=1, tn=10.
  std::vector<ScreeningDecision> mixed;
  std::map<std::string, bool> truth;
  const char* layout = "PPPPPPPPFNTTTTTTTTTT";  // P tp, F fp, N fn, T tn
  for (int i = 0; i < 20; ++i) {
    std::string id = "doc" + std::to_string(i);
    char k = layout[i];
    bool relevant = k == 'P' || k == 'N';
    bool passes = k == 'P' || k == 'F';
    mixed.emplace_back(id, passes, passes || i % 2 == 0);
    truth[id] = relevant;
  }
  auto m = confusion(mixed, truth);
  CHECK(m.tp == 8);
  CHECK(m.fp == 1);
  CHECK(m.fn == 1);
  CHECK(m.tn == 10);
  CHECK(m.total() == 20);
}

TEST_CASE("metric identities on random matrices") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> u(0, 50);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = counts(1 + u(rng), u(rng), u(rng), u(rng));
    double p = double(c.tp) / double(c.tp + c.fp);
    double r = double(c.tp) / double(c.tp + c.fn);
    CHECK(std::abs(precision(c) - p) < 1e-15);
    CHECK(std::abs(recall(c) - r) < 1e-15);
    CHECK(std::abs(f1(c) - 2 * p * r / (p + r)) < 1e-15);
    double n = double(c.total());
    // Both forms denote the same rational; the error-rate form is evaluated
    // with exact integer subtraction so the comparison can be bitwise.
    CHECK(accuracy(c) == double(c.total() - c.fp - c.fn) / n);
    CHECK(std::abs(accuracy(c) - (1.0 - double(c.fp + c.fn) / n)) <= 2.3e-16);
    for (double v : {precision(c), recall(c), f1(c), accuracy(c)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("truth and decision files") {
  auto truth = write_temp("creepdb_truth.csv", "bundle_id,relevant\n# comment\nd1,1\nd2,0\n");
  auto t = load_truth_csv(truth.string());
  CHECK(t == std::map<std::string, bool>{{"d1", true}, {"d2", false}});
  auto bad = write_temp("creepdb_truth_bad.csv", "d1,maybe\n");
  CHECK(code_of([&] { load_truth_csv(bad.string()); }) == ErrorCode::MalformedManifest);

  std::vector<ScreeningDecision> ds{{"d1", true, true}, {"d2", true, false, "only data, no \"model\""}};
  auto dpath = write_temp("creepdb_decisions.csv", decisions_to_csv(ds));
  auto back = load_decisions_csv(dpath.string());
  REQUIRE(back.size() == 2);
  CHECK(back[1].rationale() == "only data, no \"model\"");
  CHECK(back[0].pass());
  CHECK_FALSE(back[1].pass());
  for (auto p : {truth, bad, dpath}) std::filesystem::remove(p);

  auto text = metrics_text(counts(8, 1, 10, 1));
  CHECK(text.find("precision  0.8889") != std::string::npos);
  CHECK(text.find("accuracy   0.9000") != std::string::npos);
  CHECK(metrics_json(counts(0, 0, 1, 0))["precision"].is_null());
}

TEST_CASE("screen uses the Domain Filter verdict") {
  auto personas = skills::default_personas();
  nlohmann::json fixture = {{"version", 1},
                            {"responses",
                             {{"rel", {{"Domain Filter", {R"({"has_data": true, "has_equation": true})"}}}},
                              {"theory", {{"Domain Filter", {"{has_data: false, has_equation: true}"}}}},
                              {"down", {{"Domain Filter", {{{"fail", "offline"}}}}}}}}};
  skills::ScriptedBackend backend(fixture);
  corpus::DocumentBundle b;
  b.id = "rel";
  b.doi = "10.1/rel";
  b.title = "Creep of steel";
  b.year = 2020;
  b.pages = {"page"};
  auto d = screen(b, backend, personas.filter);
  CHECK(d.pass());
  b.id = "theory";
  auto t = screen(b, backend, personas.filter);
  CHECK_FALSE(t.pass());
  CHECK(t.rationale().find("no experimental creep data") != std::string::npos);
  b.id = "down";
  CHECK(code_of([&] { screen(b, backend, personas.filter); }) == ErrorCode::BackendFailure);
}
