#pragma once

#include <string>

#include "creepdb/corpus/query.hpp"
#include "creepdb/skills/skill.hpp"

namespace creepdb::corpus {

/// Query with one Term per word of `nl_query`, joined by AND.
BooleanQuery identity_query(const std::string& nl_query);

/// Asks the navigator skill for a Boolean rewrite of `nl_query`. Throws
/// BackendFailure when the backend fails or keeps producing unusable
/// queries; with `lenient` the identity query is returned instead.
BooleanQuery expand_query(const std::string& nl_query, skills::ReasoningBackend& backend,
                          const skills::Skill& navigator, bool lenient = false,
                          const skills::ToolRegistry* tools = nullptr,
                          skills::ExecutionLog* log = nullptr);

}  // namespace creepdb::corpus
