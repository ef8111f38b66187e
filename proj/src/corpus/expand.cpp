#include "creepdb/corpus/expand.hpp"

#include "creepdb/error.hpp"

namespace creepdb::corpus {

BooleanQuery identity_query(const std::string& nl_query) {
  std::vector<BooleanQuery> terms;
  for (auto& w : tokenize(nl_query)) terms.push_back(BooleanQuery::term(std::move(w)));
  require(!terms.empty(), "query has no words");
  return terms.size() == 1 ? std::move(terms[0]) : BooleanQuery::all_of(std::move(terms));
}

BooleanQuery expand_query(const std::string& nl_query, skills::ReasoningBackend& backend,
                          const skills::Skill& navigator, bool lenient,
                          const skills::ToolRegistry* tools, skills::ExecutionLog* log) {
  require(!tokenize(nl_query).empty(), "query must not be empty");
  try {
    auto outcome = skills::invoke_skill(navigator, "query:" + nl_query, {{"query", nl_query}},
                                        backend, tools, log);
    return parse_query(outcome.value.at("query").get<std::string>());
  } catch (const Error& e) {
    if (lenient) return identity_query(nl_query);
    if (e.code() == ErrorCode::BackendFailure) throw;
    fail(ErrorCode::BackendFailure, std::string("query expansion failed: ") + e.what());
  }
}

}  // namespace creepdb::corpus
