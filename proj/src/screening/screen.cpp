#include "creepdb/screening/screen.hpp"

#include "creepdb/error.hpp"

namespace creepdb::screening {

ScreeningDecision screen(const corpus::DocumentBundle& bundle, skills::ReasoningBackend& backend,
                         const skills::Skill& filter, const skills::ToolRegistry* tools,
                         skills::ExecutionLog* log) {
  require(!bundle.pages.empty(), "bundle " + bundle.id + " has no pages");
  nlohmann::json context{{"doc_id", bundle.id}, {"title", bundle.title}, {"text", bundle.full_text()}};
  auto outcome = skills::invoke_skill(filter, bundle.id, context, backend, tools, log);
  const auto& v = outcome.value;
  return ScreeningDecision(bundle.id, v.at("has_data").get<bool>(), v.at("has_equation").get<bool>(),
                           v.value("rationale", std::string{}));
}

}  // namespace creepdb::screening
