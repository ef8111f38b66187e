#include "creepdb/skills/skill.hpp"

#include "creepdb/error.hpp"

namespace creepdb::skills {

std::string render_instruction(const std::string& tmpl, const nlohmann::json& context) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out += '{';
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += '}';
      i += 2;
      continue;
    }
    if (c != '{') {
      out += c;
      ++i;
      continue;
    }
    auto end = tmpl.find('}', i);
    require(end != std::string::npos, "unterminated placeholder in instruction template");
    std::string name = tmpl.substr(i + 1, end - i - 1);
    auto it = context.find(name);
    if (it == context.end()) fail(ErrorCode::Precondition, "context lacks placeholder '" + name + "'");
    out += it->is_string() ? it->get<std::string>() : it->dump();
    i = end + 1;
  }
  return out;
}

void ToolRegistry::add(std::string name, ToolFn fn) { tools_[std::move(name)] = std::move(fn); }

nlohmann::json ToolRegistry::call(const std::string& name, const nlohmann::json& arguments) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) fail(ErrorCode::ToolScopeViolation, "tool '" + name + "' is not registered");
  return it->second(arguments);
}

std::set<std::string> ToolRegistry::names() const {
  std::set<std::string> out;
  for (const auto& [k, v] : tools_) out.insert(k);
  return out;
}

void ExecutionLog::record(ToolEvent event) {
  std::lock_guard lock(mutex_);
  events_.push_back(std::move(event));
}

std::vector<ToolEvent> ExecutionLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::map<std::string, std::set<std::string>> ExecutionLog::executed_by_skill() const {
  std::lock_guard lock(mutex_);
  std::map<std::string, std::set<std::string>> out;
  for (const auto& e : events_)
    if (e.executed) out[e.skill].insert(e.tool);
  return out;
}

void check_tools_registered(const Skill& skill, const ToolRegistry& tools) {
  for (const auto& t : skill.allowed_tools)
    require(tools.contains(t), "skill " + skill.name + " allows unregistered tool '" + t + "'");
}

nlohmann::json run_scoped_tool(const Skill& skill, const std::string& key, const std::string& tool,
                               const nlohmann::json& arguments, const ToolRegistry& tools,
                               ExecutionLog* log) {
  if (!skill.allowed_tools.count(tool)) {
    if (log) log->record({key, skill.name, tool, false});
    fail(ErrorCode::ToolScopeViolation, skill.name + " may not use tool '" + tool + "'");
  }
  if (log) log->record({key, skill.name, tool, true});
  return tools.call(tool, arguments);
}

namespace {

// A reply of the form {"tool_call": {"name": ..., "arguments": ...}}.
std::optional<std::pair<std::string, nlohmann::json>> as_tool_call(const std::string& raw) {
  nlohmann::json j;
  try {
    j = relaxed_parse(raw);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.size() != 1 || !j.contains("tool_call")) return std::nullopt;
  const auto& call = j["tool_call"];
  if (!call.is_object() || !call.contains("name") || !call["name"].is_string()) return std::nullopt;
  return std::make_pair(call["name"].get<std::string>(), call.value("arguments", nlohmann::json::object()));
}

std::string describe_violations(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) out += "\n- " + v.path + ": " + v.message;
  return out;
}

}  // namespace

SkillOutcome invoke_skill(const Skill& skill, const std::string& key, const nlohmann::json& context,
                          ReasoningBackend& backend, const ToolRegistry* tools, ExecutionLog* log) {
  require(skill.max_retries >= 0, "max_retries must be non-negative");
  const std::string base_instruction = render_instruction(skill.instruction_template, context);

  SkillOutcome outcome;
  BackendRequest request;
  request.key = key;
  request.skill = skill.name;
  request.context = context;
  request.tools.assign(skill.allowed_tools.begin(), skill.allowed_tools.end());
  request.schema = skill.schema.describe();

  std::string feedback;
  bool scope_violation = false;
  std::string last_problem;
  const std::size_t max_attempts = static_cast<std::size_t>(skill.max_retries) + 1;

  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    outcome.attempts = attempt;
    request.instruction = base_instruction + feedback;
    request.tool_results = nlohmann::json::array();

    for (std::size_t round = 0;; ++round) {
      request.call_index = outcome.backend_calls++;
      std::string raw = backend.complete(request);
      outcome.exchanges.push_back({request, raw, attempt});

      if (auto call = as_tool_call(raw)) {
        const auto& [name, args] = *call;
        if (!skill.allowed_tools.count(name) || !tools || !tools->contains(name)) {
          if (log) log->record({key, skill.name, name, false});
          scope_violation = true;
          last_problem = "tool '" + name + "' is outside the scope of " + skill.name;
          feedback = "\n\nYour previous reply requested " + last_problem +
                     ". Use only the listed tools and answer in the required format.";
          break;
        }
        if (round + 1 >= kMaxToolRounds) {
          last_problem = "more than " + std::to_string(kMaxToolRounds) + " tool calls";
          feedback = "\n\nToo many tool calls; answer in the required format now.";
          break;
        }
        if (log) log->record({key, skill.name, name, true});
        nlohmann::json result;
        try {
          result = tools->call(name, args);
        } catch (const Error& e) {
          result = {{"error", e.what()}};
        }
        request.tool_results.push_back({{"name", name}, {"arguments", args}, {"result", result}});
        continue;
      }

      auto validated = validate_output(skill.schema, raw);
      if (validated.ok()) {
        outcome.value = std::move(*validated.value);
        return outcome;
      }
      last_problem = describe_violations(validated.violations);
      feedback = "\n\nYour previous reply violated the output schema:" + last_problem;
      break;
    }
  }

  if (scope_violation)
    fail(ErrorCode::ToolScopeViolation, skill.name + ": " + last_problem + " after " +
                                            std::to_string(outcome.attempts) + " attempts");
  fail(ErrorCode::SchemaViolation, skill.name + ": no conforming output after " +
                                       std::to_string(outcome.attempts) + " attempts:" + last_problem);
}

}  // namespace creepdb::skills
