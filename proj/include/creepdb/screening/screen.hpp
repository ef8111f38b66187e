#pragma once

#include "creepdb/corpus/corpus.hpp"
#include "creepdb/screening/metrics.hpp"
#include "creepdb/skills/skill.hpp"

namespace creepdb::screening {

/// Runs the Domain Filter over the bundle's full text and captions.
/// Backend and schema errors propagate.
ScreeningDecision screen(const corpus::DocumentBundle& bundle, skills::ReasoningBackend& backend,
                         const skills::Skill& filter, const skills::ToolRegistry* tools = nullptr,
                         skills::ExecutionLog* log = nullptr);

}  // namespace creepdb::screening
