#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace creepdb::skills {

/// Recursive description of the structured value a skill must return.
class OutputSchema {
 public:
  enum class Kind { Record, List, Number, NumberWithUnit, Enum, Text, Bool };

  struct Field;

  static OutputSchema record(std::vector<Field> fields);
  static OutputSchema list(OutputSchema element, std::size_t min_items = 0);
  static OutputSchema number();
  /// `unit` fixes the expected dimension ("K", "MPa"); empty accepts any
  /// known unit.
  static OutputSchema number_with_unit(std::string unit = {});
  static OutputSchema enumeration(std::vector<std::string> values);
  static OutputSchema text();
  static OutputSchema boolean();

  Kind kind() const { return kind_; }
  const std::vector<Field>& fields() const { return fields_; }
  const OutputSchema& element() const { return *element_; }
  const std::string& unit() const { return unit_; }
  const std::vector<std::string>& values() const { return values_; }
  std::size_t min_items() const { return min_items_; }

  /// Compact human-readable rendering sent to the backend.
  std::string describe() const;

 private:
  Kind kind_ = Kind::Text;
  std::vector<Field> fields_;
  std::shared_ptr<const OutputSchema> element_;
  std::string unit_;
  std::vector<std::string> values_;
  std::size_t min_items_ = 0;
};

struct OutputSchema::Field {
  std::string name;
  OutputSchema schema;
  bool required = true;
};

struct Violation {
  std::string path;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationOutcome {
  std::optional<nlohmann::json> value;
  std::vector<Violation> violations;
  bool ok() const { return value.has_value(); }
};

/// Lenient reader for model output: JSON plus unquoted keys, unquoted text
/// values ("873.15 K"), trailing commas and surrounding markdown fences.
/// Throws ParseError.
nlohmann::json relaxed_parse(std::string_view raw);

/// Parses and type-checks. Numbers-with-units are normalized to
/// {"value": v, "unit": u}; unknown record fields are dropped.
ValidationOutcome validate_output(const OutputSchema& schema, std::string_view raw);
ValidationOutcome validate_value(const OutputSchema& schema, const nlohmann::json& value);

}  // namespace creepdb::skills
