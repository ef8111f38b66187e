#include "creepdb/skills/schema.hpp"

#include <cctype>
#include <cstdlib>

#include "creepdb/error.hpp"
#include "creepdb/formula/units.hpp"

namespace creepdb::skills {

OutputSchema OutputSchema::record(std::vector<Field> fields) {
  OutputSchema s;
  s.kind_ = Kind::Record;
  s.fields_ = std::move(fields);
  return s;
}

OutputSchema OutputSchema::list(OutputSchema element, std::size_t min_items) {
  OutputSchema s;
  s.kind_ = Kind::List;
  s.element_ = std::make_shared<const OutputSchema>(std::move(element));
  s.min_items_ = min_items;
  return s;
}

OutputSchema OutputSchema::number() {
  OutputSchema s;
  s.kind_ = Kind::Number;
  return s;
}

OutputSchema OutputSchema::number_with_unit(std::string unit) {
  if (!unit.empty()) formula::parse_unit(unit);
  OutputSchema s;
  s.kind_ = Kind::NumberWithUnit;
  s.unit_ = std::move(unit);
  return s;
}

OutputSchema OutputSchema::enumeration(std::vector<std::string> values) {
  require(!values.empty(), "an enumeration needs at least one value");
  OutputSchema s;
  s.kind_ = Kind::Enum;
  s.values_ = std::move(values);
  return s;
}

OutputSchema OutputSchema::text() { return OutputSchema{}; }

OutputSchema OutputSchema::boolean() {
  OutputSchema s;
  s.kind_ = Kind::Bool;
  return s;
}

std::string OutputSchema::describe() const {
  switch (kind_) {
    case Kind::Record: {
      std::string out = "{";
      for (std::size_t i = 0; i < fields_.size(); ++i) {
        if (i) out += ", ";
        out += fields_[i].name + (fields_[i].required ? "" : "?") + ": " + fields_[i].schema.describe();
      }
      return out + "}";
    }
    case Kind::List:
      return "[" + element_->describe() + (min_items_ ? ", at least " + std::to_string(min_items_) : "") + "]";
    case Kind::Number:
      return "number";
    case Kind::NumberWithUnit:
      return unit_.empty() ? "number with unit" : "number with unit (" + unit_ + ")";
    case Kind::Enum: {
      std::string out = "one of ";
      for (std::size_t i = 0; i < values_.size(); ++i) out += (i ? "|" : "") + values_[i];
      return out;
    }
    case Kind::Text:
      return "text";
    case Kind::Bool:
      return "boolean";
  }
  return "text";
}

// ---------------------------------------------------------------------------
// Relaxed parsing

namespace {

class RelaxedParser {
 public:
  explicit RelaxedParser(std::string_view s) : s_(s) {}

  nlohmann::json parse_document() {
    skip_ws();
    nlohmann::json v = parse_value(0, true);
    skip_ws();
    if (i_ != s_.size()) throw ParseError(i_, "unexpected trailing text");
    return v;
  }

 private:
  static constexpr int kMaxDepth = 128;

  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  nlohmann::json parse_value(int depth, bool top) {
    if (depth > kMaxDepth) throw ParseError(i_, "nesting too deep");
    skip_ws();
    if (i_ >= s_.size()) throw ParseError(i_, "unexpected end of input");
    char c = s_[i_];
    if (c == '{') return parse_object(depth);
    if (c == '[') return parse_array(depth);
    if (c == '"') return parse_string();
    return parse_bare(top);
  }

  nlohmann::json parse_object(int depth) {
    ++i_;
    nlohmann::json obj = nlohmann::json::object();
    while (true) {
      skip_ws();
      if (i_ >= s_.size()) throw ParseError(i_, "unterminated object");
      if (s_[i_] == '}') {
        ++i_;
        return obj;
      }
      std::string key = s_[i_] == '"' ? parse_string().get<std::string>() : parse_key();
      skip_ws();
      if (i_ >= s_.size() || s_[i_] != ':') throw ParseError(i_, "expected ':' after key '" + key + "'");
      ++i_;
      obj[key] = parse_value(depth + 1, false);
      skip_ws();
      if (i_ < s_.size() && s_[i_] == ',') {
        ++i_;
      } else if (i_ < s_.size() && s_[i_] != '}') {
        throw ParseError(i_, "expected ',' or '}'");
      }
    }
  }

  nlohmann::json parse_array(int depth) {
    ++i_;
    nlohmann::json arr = nlohmann::json::array();
    while (true) {
      skip_ws();
      if (i_ >= s_.size()) throw ParseError(i_, "unterminated list");
      if (s_[i_] == ']') {
        ++i_;
        return arr;
      }
      arr.push_back(parse_value(depth + 1, false));
      skip_ws();
      if (i_ < s_.size() && s_[i_] == ',') {
        ++i_;
      } else if (i_ < s_.size() && s_[i_] != ']') {
        throw ParseError(i_, "expected ',' or ']'");
      }
    }
  }

  std::string parse_key() {
    std::size_t start = i_;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
          static_cast<unsigned char>(c) >= 0x80)
        ++i_;
      else
        break;
    }
    if (start == i_) throw ParseError(i_, "expected a key");
    return std::string(s_.substr(start, i_ - start));
  }

  nlohmann::json parse_string() {
    std::size_t start = i_;
    std::size_t end = start + 1;
    bool escaped = false;
    for (; end < s_.size(); ++end) {
      if (escaped) {
        escaped = false;
      } else if (s_[end] == '\\') {
        escaped = true;
      } else if (s_[end] == '"') {
        break;
      }
    }
    if (end >= s_.size()) throw ParseError(start, "unterminated string");
    i_ = end + 1;
    try {
      return nlohmann::json::parse(s_.substr(start, end - start + 1));
    } catch (const nlohmann::json::exception&) {
      throw ParseError(start, "invalid string escape");
    }
  }

  nlohmann::json parse_bare(bool top) {
    std::size_t start = i_;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (!top && (c == ',' || c == '}' || c == ']' || c == '\n')) break;
      ++i_;
    }
    std::string text(s_.substr(start, i_ - start));
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    if (text.empty()) throw ParseError(start, "expected a value");
    if (text == "true") return true;
    if (text == "false") return false;
    if (text == "null") return nullptr;
    char* endp = nullptr;
    double v = std::strtod(text.c_str(), &endp);
    if (endp && *endp == '\0' && std::isfinite(v)) return v;
    return text;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

std::string_view strip_fences(std::string_view raw) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  raw = trim(raw);
  if (raw.substr(0, 3) == "```") {
    auto nl = raw.find('\n');
    raw = nl == std::string_view::npos ? std::string_view{} : raw.substr(nl + 1);
    raw = trim(raw);
    if (raw.size() >= 3 && raw.substr(raw.size() - 3) == "```") raw.remove_suffix(3);
    raw = trim(raw);
  }
  return raw;
}

std::string join_path(const std::string& base, const std::string& field) {
  return base.empty() ? field : base + "." + field;
}

std::string type_name(const nlohmann::json& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "boolean";
  if (v.is_number()) return "number";
  if (v.is_string()) return "text";
  if (v.is_array()) return "list";
  return "record";
}

nlohmann::json check(const OutputSchema& schema, const nlohmann::json& v, const std::string& path,
                     std::vector<Violation>& out) {
  auto bad = [&](std::string msg) {
    out.push_back({path.empty() ? "$" : path, std::move(msg)});
    return nlohmann::json();
  };
  using K = OutputSchema::Kind;
  switch (schema.kind()) {
    case K::Record: {
      if (!v.is_object()) return bad("expected a record, got " + type_name(v));
      nlohmann::json result = nlohmann::json::object();
      for (const auto& f : schema.fields()) {
        std::string p = join_path(path, f.name);
        auto it = v.find(f.name);
        if (it == v.end() || it->is_null()) {
          if (f.required) out.push_back({p, "required field is missing"});
          continue;
        }
        result[f.name] = check(f.schema, *it, p, out);
      }
      return result;
    }
    case K::List: {
      if (!v.is_array()) return bad("expected a list, got " + type_name(v));
      if (v.size() < schema.min_items())
        bad("expected at least " + std::to_string(schema.min_items()) + " items");
      nlohmann::json result = nlohmann::json::array();
      for (std::size_t i = 0; i < v.size(); ++i)
        result.push_back(check(schema.element(), v[i], path + "[" + std::to_string(i) + "]", out));
      return result;
    }
    case K::Number:
      if (!v.is_number()) return bad("expected a number, got " + type_name(v));
      return v;
    case K::NumberWithUnit: {
      formula::Quantity q;
      try {
        if (v.is_string()) {
          q = formula::parse_quantity(v.get<std::string>());
        } else if (v.is_object() && v.contains("value") && v.contains("unit") && v["value"].is_number() &&
                   v["unit"].is_string()) {
          q = {v["value"].get<double>(), v["unit"].get<std::string>()};
          formula::parse_unit(q.unit);
        } else {
          return bad("expected a number with unit, got " + type_name(v));
        }
      } catch (const Error& e) {
        return bad(e.what());
      }
      if (!v.is_object() && q.unit == "1" && !schema.unit().empty() && schema.unit() != "1")
        return bad("unit missing, expected " + schema.unit());
      if (!schema.unit().empty() &&
          !(formula::unit_dimension(q.unit) == formula::unit_dimension(schema.unit())))
        return bad("unit '" + q.unit + "' is not convertible to " + schema.unit());
      return {{"value", q.value}, {"unit", q.unit}};
    }
    case K::Enum: {
      if (!v.is_string()) return bad("expected one of the enumeration values, got " + type_name(v));
      const auto& vals = schema.values();
      if (std::find(vals.begin(), vals.end(), v.get<std::string>()) == vals.end())
        return bad("'" + v.get<std::string>() + "' is not an allowed value");
      return v;
    }
    case K::Text:
      if (!v.is_string()) return bad("expected text, got " + type_name(v));
      return v;
    case K::Bool:
      if (!v.is_boolean()) return bad("expected a boolean, got " + type_name(v));
      return v;
  }
  return v;
}

}  // namespace

nlohmann::json relaxed_parse(std::string_view raw) { return RelaxedParser(strip_fences(raw)).parse_document(); }

ValidationOutcome validate_value(const OutputSchema& schema, const nlohmann::json& value) {
  ValidationOutcome out;
  nlohmann::json v = check(schema, value, "", out.violations);
  if (out.violations.empty()) out.value = std::move(v);
  return out;
}

ValidationOutcome validate_output(const OutputSchema& schema, std::string_view raw) {
  nlohmann::json parsed;
  try {
    parsed = relaxed_parse(raw);
  } catch (const ParseError& e) {
    ValidationOutcome out;
    out.violations.push_back({"$", std::string("unparseable output: ") + e.what()});
    return out;
  }
  return validate_value(schema, parsed);
}

}  // namespace creepdb::skills
