#include "creepdb/corpus/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "creepdb/error.hpp"

namespace creepdb::corpus {

namespace fs = std::filesystem;

const FigureAsset* DocumentBundle::figure(std::string_view figure_id) const {
  for (const auto& f : figures)
    if (f.figure_id == figure_id) return &f;
  return nullptr;
}

std::string DocumentBundle::full_text() const {
  std::string out = title;
  for (const auto& f : figures) out += "\n\n" + f.figure_id + ": " + f.caption;
  for (const auto& p : pages) out += "\n\n" + p;
  return out;
}

void DocumentBundle::check() const {
  require(!id.empty(), "bundle id is empty");
  require(!doi.empty(), "bundle " + id + " has an empty DOI");
  require(year >= 1800 && year <= 2100, "bundle " + id + " has year " + std::to_string(year));
  require(!pages.empty(), "bundle " + id + " has no pages");
  for (const auto& f : figures)
    require(f.image.width() >= 32 && f.image.height() >= 32,
            "figure " + f.figure_id + " of bundle " + id + " is smaller than 32x32");
}

CorpusIndex::CorpusIndex(std::vector<DocumentBundle> bundles) {
  std::set<std::string> dois;
  for (auto& b : bundles) {
    b.check();
    if (!dois.insert(b.doi).second) fail(ErrorCode::DuplicateDoi, "DOI " + b.doi + " listed twice");
    require(!entries_.count(b.id), "bundle id " + b.id + " listed twice");
    IndexEntry e;
    e.doi = b.doi;
    e.title = b.title;
    for (auto& t : tokenize(b.full_text())) e.tokens.insert(std::move(t));
    std::string id = b.id;
    e.bundle = std::make_shared<const DocumentBundle>(std::move(b));
    entries_.emplace(std::move(id), std::move(e));
  }
}

std::vector<std::string> CorpusIndex::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

const IndexEntry& CorpusIndex::entry(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) fail(ErrorCode::NotFound, "no bundle " + id);
  return it->second;
}

const DocumentBundle& CorpusIndex::bundle(const std::string& id) const { return *entry(id).bundle; }

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::MissingAsset, "missing asset " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentBundle parse_line(const nlohmann::json& j, const fs::path& base, const std::string& where,
                          std::set<std::string>& dois) {
  DocumentBundle b;
  try {
    b.id = j.at("id").get<std::string>();
    b.doi = j.at("doi").get<std::string>();
    b.title = j.at("title").get<std::string>();
    b.authors = j.value("authors", std::vector<std::string>{});
    b.year = j.at("year").get<int>();
    for (const auto& p : j.at("pages")) b.pages.push_back(p.get<std::string>());
    for (const auto& f : j.value("figures", nlohmann::json::array()))
      b.figures.push_back({f.at("id").get<std::string>(), f.at("image_path").get<std::string>(),
                           f.value("caption", ""), {}});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedManifest, where + ": " + e.what());
  }
  if (b.doi.empty() || b.pages.empty() || b.year < 1800 || b.year > 2100)
    fail(ErrorCode::MalformedManifest, where + ": bundle invariants violated");
  if (!dois.insert(b.doi).second)
    fail(ErrorCode::DuplicateDoi, where + ": DOI " + b.doi + " listed twice");
  b.source_path = base.string();
  for (auto& page : b.pages) page = read_file(base / page);
  for (auto& f : b.figures) {
    fs::path p = base / f.image_path;
    if (!fs::exists(p)) fail(ErrorCode::MissingAsset, "missing asset " + p.string());
    f.image = digitizer::read_png(p.string());
  }
  return b;
}

}  // namespace

CorpusIndex ingest_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::MissingAsset, "cannot open manifest " + manifest_path);
  fs::path base = fs::path(manifest_path).parent_path();
  std::vector<DocumentBundle> bundles;
  std::set<std::string> dois;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = manifest_path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::MalformedManifest, where + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::MalformedManifest, where + ": not an object");
    bundles.push_back(parse_line(j, base, where, dois));
  }
  return CorpusIndex(std::move(bundles));
}

std::vector<std::string> search_index(const CorpusIndex& index, const BooleanQuery& query) {
  std::vector<std::string> out;
  for (const auto& [id, e] : index.entries())
    if (query.matches(e.tokens)) out.push_back(id);
  return out;
}

}  // namespace creepdb::corpus
