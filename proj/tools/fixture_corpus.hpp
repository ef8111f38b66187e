#pragma once

#include <map>
#include <string>

namespace creepdb::fixtures {

/// Relative path -> file content for the six-document demonstration corpus:
/// manifest, pages, figures, scripted backend replies, screening truth and a
/// pipeline config. Deterministic.
std::map<std::string, std::string> generate_fixture_corpus();

/// Writes the corpus under `dir` (created when missing).
void write_fixture_corpus(const std::string& dir);

}  // namespace creepdb::fixtures
