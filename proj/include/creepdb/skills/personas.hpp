#pragma once

#include <map>
#include <string>

#include "creepdb/skills/skill.hpp"

namespace creepdb::skills {

namespace tool {
inline constexpr const char* kCorpusSearch = "corpus_search";
inline constexpr const char* kReadFullText = "read_full_text";
inline constexpr const char* kDigitizeFigure = "digitize_figure";
inline constexpr const char* kPhysicsValidation = "physics_validation";
inline constexpr const char* kStoreInsert = "store_insert";
}  // namespace tool

/// The five stage skills.
struct Personas {
  Skill navigator;    // Bibliographic Navigator: query expansion
  Skill filter;       // Domain Filter: relevance screening
  Skill parser;       // MultiModal Parser: equation, conditions, figure
  Skill guardrail;    // Physics Guardrail: validation
  Skill serializer;   // Data Serializer: storage
};

/// Default templates; `template_overrides` maps a skill name to a
/// replacement instruction template.
Personas default_personas(int max_retries = 2,
                          const std::map<std::string, std::string>& template_overrides = {});

OutputSchema query_schema();
OutputSchema screening_schema();
OutputSchema extraction_schema();
OutputSchema validation_schema();
OutputSchema storage_schema();

}  // namespace creepdb::skills
