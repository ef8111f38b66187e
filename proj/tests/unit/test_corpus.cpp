#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "creepdb/corpus/corpus.hpp"
#include "creepdb/corpus/expand.hpp"
#include "creepdb/error.hpp"
#include "creepdb/skills/personas.hpp"

using namespace creepdb;
using namespace creepdb::corpus;
namespace fs = std::filesystem;
using nlohmann::json;

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

const std::vector<std::string> kVocab = {"creep", "steel", "nickel", "ice", "polymer", "rupture"};

BooleanQuery random_query(std::mt19937& rng, int depth) {
  int pick = depth <= 0 ? 0 : static_cast<int>(rng() % 4);
  if (pick == 0) return BooleanQuery::term(kVocab[rng() % kVocab.size()]);
  if (pick == 3) return BooleanQuery::negate(random_query(rng, depth - 1));
  std::vector<BooleanQuery> kids;
  int n = 2 + static_cast<int>(rng() % 2);
  for (int i = 0; i < n; ++i) kids.push_back(random_query(rng, depth - 1));
  return pick == 1 ? BooleanQuery::all_of(std::move(kids)) : BooleanQuery::any_of(std::move(kids));
}

// Direct evaluation over the raw text: a word occurs when it appears as a
// token. Independent of BooleanQuery::matches.
bool oracle(const BooleanQuery& q, const std::string& text) {
  switch (q.kind()) {
    case BooleanQuery::Kind::Term: {
      auto toks = tokenize(text);
      return std::find(toks.begin(), toks.end(), q.text()) != toks.end();
    }
    case BooleanQuery::Kind::And:
      for (const auto& c : q.children())
        if (!oracle(c, text)) return false;
      return true;
    case BooleanQuery::Kind::Or:
      for (const auto& c : q.children())
        if (oracle(c, text)) return true;
      return false;
    case BooleanQuery::Kind::Not:
      return !oracle(q.children()[0], text);
  }
  return false;
}

std::set<std::string> token_set(const std::string& s) {
  auto v = tokenize(s);
  return {v.begin(), v.end()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("creepdb_corpus_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path / name, std::ios::binary) << content;
  }
};

json manifest_line(const std::string& id, const std::string& doi, const std::string& page) {
  return {{"id", id}, {"doi", doi}, {"title", "Title " + id}, {"authors", {"A. Author"}},
          {"year", 2020}, {"pages", {page}}};
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("Ni-based SUPERALLOY, 873.15 K; -creep-") ==
        std::vector<std::string>{"ni-based", "superalloy", "873", "15", "k", "creep"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  --  ").empty());
}

TEST_CASE("query parsing and precedence") {
  auto q = parse_query("a OR b c NOT d");
  auto expect = BooleanQuery::any_of(
      {BooleanQuery::term("a"),
       BooleanQuery::all_of({BooleanQuery::term("b"), BooleanQuery::term("c"),
                             BooleanQuery::negate(BooleanQuery::term("d"))})});
  CHECK(q == expect);
  CHECK(q.str() == "a OR (b AND c AND NOT d)");
  CHECK(parse_query("(Ni-based OR Co-based) AND creep") ==
        BooleanQuery::all_of({BooleanQuery::any_of({BooleanQuery::term("ni-based"),
                                                    BooleanQuery::term("co-based")}),
                              BooleanQuery::term("creep")}));
  CHECK(parse_query("\"power law\" AND creep").str() == "\"power law\" AND creep");
  CHECK(parse_query("a AND (b AND c)") == parse_query("a b c"));

  for (const char* bad : {"", "a AND", "(a", "a)", "OR b", "\"open", "NOT", "a AND AND b"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_query(bad), ParseError);
  }
  try {
    parse_query("creep AND (steel OR");
    FAIL("no throw");
  } catch (const ParseError& e) {
    CHECK(e.position() == 19);
  }
  std::string deep(100, '(');
  deep += "a" + std::string(100, ')');
  CHECK_THROWS_AS(parse_query(deep), ParseError);
  CHECK_THROWS_AS(BooleanQuery::all_of({BooleanQuery::term("a")}), Error);
}

TEST_CASE("query properties on random trees") {
  std::mt19937 rng(77);
  std::vector<std::set<std::string>> docs;
  for (int i = 0; i < 64; ++i) {
    std::set<std::string> d;
    for (std::size_t w = 0; w < kVocab.size(); ++w)
      if (i >> w & 1) d.insert(kVocab[w]);
    docs.push_back(d);
  }
  for (int trial = 0; trial < 400; ++trial) {
    auto q = random_query(rng, 1 + trial % 4);
    CAPTURE(q.str());
    CHECK(parse_query(q.str()) == q);
    auto qq = BooleanQuery::all_of({q, q});
    auto oo = BooleanQuery::any_of({q, q});
    auto nn = BooleanQuery::negate(BooleanQuery::negate(q));
    for (const auto& d : docs) {
      bool m = q.matches(d);
      CHECK(qq.matches(d) == m);
      CHECK(oo.matches(d) == m);
      CHECK(nn.matches(d) == m);
      CHECK(BooleanQuery::negate(q).matches(d) == !m);
    }
  }
}

TEST_CASE("search agrees with a direct text oracle") {
  std::mt19937 rng(2024);
  for (int round = 0; round < 30; ++round) {
    std::vector<DocumentBundle> bundles;
    int n = 1 + static_cast<int>(rng() % 50);
    std::map<std::string, std::string> texts;
    for (int i = 0; i < n; ++i) {
      DocumentBundle b;
      b.id = "doc" + std::to_string(100 + i);
      b.doi = "10.1/" + b.id;
      b.title = "T";
      b.year = 2001;
      std::string page;
      for (int w = 0; w < 6; ++w)
        if (rng() % 3 == 0) page += kVocab[rng() % kVocab.size()] + (rng() % 2 ? " " : ", ");
      b.pages = {page + "end"};
      texts[b.id] = b.full_text();
      bundles.push_back(b);
    }
    CorpusIndex index(std::move(bundles));
    for (int k = 0; k < 10; ++k) {
      auto q = random_query(rng, 3);
      std::vector<std::string> expect;
      for (const auto& [id, text] : texts)
        if (oracle(q, text)) expect.push_back(id);
      CHECK(search_index(index, q) == expect);
    }
  }
}

TEST_CASE("multi-word terms need every word") {
  auto q = BooleanQuery::term("power law");
  CHECK(q.matches(token_set("a power-law? no: the law of power")));
  CHECK_FALSE(q.matches(token_set("power only")));
}

TEST_CASE("index construction") {
  DocumentBundle a;
  a.id = "a";
  a.doi = "10.1/x";
  a.title = "t";
  a.year = 2000;
  a.pages = {"p"};
  auto b = a;
  b.id = "b";
  CHECK(code_of([&] { CorpusIndex({a, b}); }) == ErrorCode::DuplicateDoi);
  b.doi = "10.1/y";
  CorpusIndex idx({a, b});
  CHECK(idx.ids() == std::vector<std::string>{"a", "b"});
  CHECK(code_of([&] { idx.bundle("zzz"); }) == ErrorCode::NotFound);
  CHECK(CorpusIndex().empty());
}

TEST_CASE("manifest ingestion") {
  TempDir dir;
  const std::string page = "line one\r\nline two\n\xce\xb5 = 0.01\n";
  dir.write("p1.txt", page);
  dir.write("p2.txt", "creep of ice");

  SUBCASE("happy path keeps bytes") {
    dir.write("m.jsonl", manifest_line("d1", "10.1/a", "p1.txt").dump() + "\n\n" +
                             manifest_line("d2", "10.1/b", "p2.txt").dump() + "\n");
    auto idx = ingest_manifest((dir.path / "m.jsonl").string());
    CHECK(idx.size() == 2);
    CHECK(idx.bundle("d1").pages[0] == page);
    CHECK(search_index(idx, parse_query("ice")) == std::vector<std::string>{"d2"});
  }
  SUBCASE("empty manifest") {
    dir.write("m.jsonl", "");
    CHECK(ingest_manifest((dir.path / "m.jsonl").string()).empty());
  }
  SUBCASE("duplicate DOI") {
    dir.write("m.jsonl", manifest_line("d1", "10.1/a", "p1.txt").dump() + "\n" +
                             manifest_line("d2", "10.1/a", "missing.txt").dump() + "\n");
    CHECK(code_of([&] { ingest_manifest((dir.path / "m.jsonl").string()); }) == ErrorCode::DuplicateDoi);
  }
  SUBCASE("malformed line reports its number") {
    dir.write("m.jsonl", manifest_line("d1", "10.1/a", "p1.txt").dump() + "\n{oops\n");
    try {
      ingest_manifest((dir.path / "m.jsonl").string());
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MalformedManifest);
      CHECK(std::string(e.what()).find("m.jsonl:2") != std::string::npos);
    }
    dir.write("m.jsonl", json{{"id", "d1"}}.dump() + "\n");
    CHECK(code_of([&] { ingest_manifest((dir.path / "m.jsonl").string()); }) ==
          ErrorCode::MalformedManifest);
  }
  SUBCASE("missing assets") {
    dir.write("m.jsonl", manifest_line("d1", "10.1/a", "nope.txt").dump() + "\n");
    CHECK(code_of([&] { ingest_manifest((dir.path / "m.jsonl").string()); }) == ErrorCode::MissingAsset);
    auto line = manifest_line("d1", "10.1/a", "p1.txt");
    line["figures"] = {{{"id", "fig1"}, {"image_path", "fig1.png"}}};
    dir.write("m.jsonl", line.dump() + "\n");
    CHECK(code_of([&] { ingest_manifest((dir.path / "m.jsonl").string()); }) == ErrorCode::MissingAsset);
    CHECK(code_of([&] { ingest_manifest((dir.path / "absent.jsonl").string()); }) == ErrorCode::MissingAsset);
  }
}

TEST_CASE("query expansion") {
  auto navigator = skills::default_personas(1).navigator;
  SUBCASE("scripted rewrite") {
    skills::ScriptedBackend b(json{
        {"version", 1},
        {"responses",
         {{"query:creep of superalloys",
           {{navigator.name, {R"({"query": "(Ni-based OR Co-based) AND creep"})"}}}}}}});
    auto q = expand_query("creep of superalloys", b, navigator);
    CHECK(q == BooleanQuery::all_of({BooleanQuery::any_of({BooleanQuery::term("ni-based"),
                                                           BooleanQuery::term("co-based")}),
                                     BooleanQuery::term("creep")}));
  }
  SUBCASE("echo backend") {
    skills::EchoBackend echo;
    CHECK(expand_query("creep", echo, navigator) == BooleanQuery::term("creep"));
    CHECK(code_of([&] { expand_query("   ", echo, navigator); }) == ErrorCode::Precondition);
  }
  SUBCASE("unusable output") {
    skills::ScriptedBackend b(
        json{{"version", 1}, {"responses", {{"query:steel creep", {{navigator.name, {R"({"query": "AND ("})"}}}}}}});
    CHECK(code_of([&] { expand_query("steel creep", b, navigator); }) == ErrorCode::BackendFailure);
    CHECK(expand_query("steel creep", b, navigator, true) ==
          BooleanQuery::all_of({BooleanQuery::term("steel"), BooleanQuery::term("creep")}));
    skills::ScriptedBackend empty(json{{"version", 1}, {"responses", json::object()}});
    CHECK(code_of([&] { expand_query("steel creep", empty, navigator); }) == ErrorCode::BackendFailure);
  }
}
