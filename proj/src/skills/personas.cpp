#include "creepdb/skills/personas.hpp"

#include "creepdb/error.hpp"
#include "creepdb/formula/equation.hpp"
#include "creepdb/vocabulary.hpp"

namespace creepdb::skills {

using F = OutputSchema::Field;

OutputSchema query_schema() { return OutputSchema::record({{"query", OutputSchema::text(), true}}); }

OutputSchema screening_schema() {
  return OutputSchema::record({{"has_data", OutputSchema::boolean(), true},
                               {"has_equation", OutputSchema::boolean(), true},
                               {"rationale", OutputSchema::text(), false}});
}

namespace {

OutputSchema axis_schema() {
  auto anchor = OutputSchema::record({{"pixel", OutputSchema::number(), true},
                                      {"value", OutputSchema::number(), true}});
  return OutputSchema::record({{"scale", OutputSchema::enumeration({"linear", "log10"}), true},
                               {"unit", OutputSchema::text(), true},
                               {"anchors", OutputSchema::list(anchor, 2), true}});
}

}  // namespace

OutputSchema extraction_schema() {
  std::vector<std::string> categories(kMaterialCategories.begin(), kMaterialCategories.end());
  std::vector<std::string> roles{"strain", "stress", "time", "temperature",
                                 "activation_energy", "gas_constant", "parameter", "other"};
  auto symbol = OutputSchema::record({{"name", OutputSchema::text(), true},
                                      {"role", OutputSchema::enumeration(roles), true},
                                      {"unit", OutputSchema::text(), true}});
  auto param = OutputSchema::record({{"name", OutputSchema::text(), true},
                                     {"value", OutputSchema::number_with_unit(), true}});
  auto series = OutputSchema::record({{"label", OutputSchema::text(), true},
                                      {"color", OutputSchema::text(), true}});
  auto figure = OutputSchema::record({{"figure_id", OutputSchema::text(), true},
                                      {"x_axis", axis_schema(), true},
                                      {"y_axis", axis_schema(), true},
                                      {"series", OutputSchema::list(series, 1), true},
                                      {"target", OutputSchema::text(), false}});
  return OutputSchema::record({{"material", OutputSchema::text(), true},
                               {"category", OutputSchema::enumeration(categories), true},
                               {"temperature", OutputSchema::number_with_unit("K"), true},
                               {"stress", OutputSchema::number_with_unit("MPa"), true},
                               {"equation", OutputSchema::text(), false},
                               {"model", OutputSchema::text(), false},
                               {"symbols", OutputSchema::list(symbol), false},
                               {"params", OutputSchema::list(param), false},
                               {"figure", figure, false},
                               {"evidence", OutputSchema::list(OutputSchema::text()), false}});
}

OutputSchema validation_schema() {
  return OutputSchema::record(
      {{"verdict", OutputSchema::enumeration({"Valid", "Valid-TextOnly", "Flagged", "Rejected"}), true},
       {"reasons", OutputSchema::list(OutputSchema::text()), false}});
}

OutputSchema storage_schema() {
  return OutputSchema::record({{"record_id", OutputSchema::number(), true}});
}

Personas default_personas(int max_retries, const std::map<std::string, std::string>& overrides) {
  auto tmpl = [&](const std::string& name, std::string fallback) {
    auto it = overrides.find(name);
    return it == overrides.end() ? fallback : it->second;
  };
  Personas p;
  p.navigator = {"Bibliographic Navigator",
                 tmpl("Bibliographic Navigator",
                      "You are a bibliographic navigator for creep-mechanics literature. Rewrite the "
                      "request \"{query}\" as a Boolean query using AND, OR, NOT, parentheses and "
                      "quoted phrases. Expand implied keywords, for example superalloy becomes "
                      "(Ni-based OR Co-based). Keep every salient term of the request."),
                 {tool::kCorpusSearch},
                 query_schema(),
                 max_retries};
  p.filter = {"Domain Filter",
              tmpl("Domain Filter",
                   "You are a domain filter. Read the full text of \"{title}\" (document {doc_id}). "
                   "Report has_data = true only if it presents experimental creep measurements, and "
                   "has_equation = true only if it states an explicit constitutive equation. Purely "
                   "theoretical work has no data. Explain a rejection in the rationale.\n\n{text}"),
              {tool::kReadFullText},
              screening_schema(),
              max_retries};
  p.parser = {"MultiModal Parser",
              tmpl("MultiModal Parser",
                   "You are a multimodal parser. From document {doc_id} extract the material, its "
                   "category, the test temperature and stress with units, the creep equation with "
                   "every symbol bound to a role and unit, the parameter values stated in the text, "
                   "and for the creep-curve figure the axis anchors, series colors, legend labels and "
                   "the target condition. Figures: {figures}"),
              {tool::kReadFullText, tool::kDigitizeFigure},
              extraction_schema(),
              max_retries};
  p.guardrail = {"Physics Guardrail",
                 tmpl("Physics Guardrail",
                      "You are a physics guardrail. Check completeness, relevance, dimensional "
                      "integrity and cross-modal agreement of candidate {doc_id}."),
                 {tool::kPhysicsValidation},
                 validation_schema(),
                 max_retries};
  p.serializer = {"Data Serializer",
                  tmpl("Data Serializer",
                       "You are a data serializer. Store the validated record of {doc_id} with its "
                       "DOI provenance."),
                  {tool::kStoreInsert},
                  storage_schema(),
                  max_retries};
  return p;
}

}  // namespace creepdb::skills
