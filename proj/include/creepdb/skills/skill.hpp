#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "creepdb/skills/backend.hpp"
#include "creepdb/skills/schema.hpp"

namespace creepdb::skills {

/// Instruction template (I), allowed tools (T) and output constraint (C).
struct Skill {
  std::string name;
  std::string instruction_template;
  std::set<std::string> allowed_tools;
  OutputSchema schema;
  int max_retries = 2;
};

/// Substitutes {placeholder} fields from a JSON object. Strings are inserted
/// verbatim, other values serialized. Throws Precondition on a missing key.
std::string render_instruction(const std::string& tmpl, const nlohmann::json& context);

using ToolFn = std::function<nlohmann::json(const nlohmann::json& arguments)>;

class ToolRegistry {
 public:
  void add(std::string name, ToolFn fn);
  bool contains(const std::string& name) const { return tools_.count(name) > 0; }
  nlohmann::json call(const std::string& name, const nlohmann::json& arguments) const;
  std::set<std::string> names() const;

 private:
  std::map<std::string, ToolFn> tools_;
};

struct ToolEvent {
  std::string key;
  std::string skill;
  std::string tool;
  bool executed = false;  // false when the call was refused
};

/// Thread-safe record of every tool request.
class ExecutionLog {
 public:
  void record(ToolEvent event);
  std::vector<ToolEvent> events() const;
  /// Executed tool names grouped by skill.
  std::map<std::string, std::set<std::string>> executed_by_skill() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ToolEvent> events_;
};

struct BackendExchange {
  BackendRequest request;
  std::string response;
  std::size_t attempt = 0;
};

struct SkillOutcome {
  nlohmann::json value;
  std::size_t attempts = 0;
  std::size_t backend_calls = 0;
  std::vector<BackendExchange> exchanges;
};

inline constexpr std::size_t kMaxToolRounds = 8;

/// Runs one skill: renders the instruction, calls the backend, executes
/// permitted tool calls ({"tool_call": {"name", "arguments"}}) and validates
/// the final answer, retrying with the violations appended. Throws
/// SchemaViolation, ToolScopeViolation or BackendFailure.
SkillOutcome invoke_skill(const Skill& skill, const std::string& key, const nlohmann::json& context,
                          ReasoningBackend& backend, const ToolRegistry* tools = nullptr,
                          ExecutionLog* log = nullptr);

/// Executes a tool on behalf of a skill without a backend round trip.
/// Throws ToolScopeViolation when the tool is outside the skill's scope.
nlohmann::json run_scoped_tool(const Skill& skill, const std::string& key, const std::string& tool,
                               const nlohmann::json& arguments, const ToolRegistry& tools,
                               ExecutionLog* log = nullptr);

/// Throws Precondition when a skill names a tool the registry lacks.
void check_tools_registered(const Skill& skill, const ToolRegistry& tools);

}  // namespace creepdb::skills
