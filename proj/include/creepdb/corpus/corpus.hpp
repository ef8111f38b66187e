#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/corpus/query.hpp"
#include "creepdb/digitizer/image.hpp"

namespace creepdb::corpus {

struct FigureAsset {
  std::string figure_id;
  std::string image_path;
  std::string caption;
  digitizer::RasterImage image;
};

struct DocumentBundle {
  std::string id;
  std::string doi;
  std::string title;
  std::vector<std::string> authors;
  int year = 0;
  std::vector<std::string> pages;
  std::vector<FigureAsset> figures;
  std::string source_path;

  const FigureAsset* figure(std::string_view figure_id) const;
  /// Title, figure captions and pages joined by blank lines.
  std::string full_text() const;
  /// Throws Precondition when a bundle invariant is violated.
  void check() const;
};

struct IndexEntry {
  std::string doi;
  std::string title;
  std::set<std::string> tokens;
  std::shared_ptr<const DocumentBundle> bundle;
};

/// Immutable after construction; safe for concurrent readers.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  /// Throws DuplicateDoi.
  explicit CorpusIndex(std::vector<DocumentBundle> bundles);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<std::string> ids() const;
  const IndexEntry& entry(const std::string& id) const;
  const DocumentBundle& bundle(const std::string& id) const;
  const std::map<std::string, IndexEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, IndexEntry> entries_;
};

/// Line-delimited JSON manifest; relative paths resolve against the
/// manifest's directory. Throws DuplicateDoi, MalformedManifest (with the
/// line number) or MissingAsset.
CorpusIndex ingest_manifest(const std::string& manifest_path);

/// Ids whose token sets satisfy the query, in ascending id order.
std::vector<std::string> search_index(const CorpusIndex& index, const BooleanQuery& query);

}  // namespace creepdb::corpus
