#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace creepdb::corpus {

/// Lowercased word tokens: runs of letters, digits and non-ASCII bytes,
/// with internal hyphens kept ("Ni-based" -> "ni-based").
std::vector<std::string> tokenize(std::string_view text);

/// Boolean retrieval tree. Term text is stored as its lowercased words and matched case-insensitively as whole
/// words; a multi-word term requires every one of its words.
class BooleanQuery {
 public:
  enum class Kind { Term, And, Or, Not };

  static BooleanQuery term(std::string text);
  static BooleanQuery all_of(std::vector<BooleanQuery> children);
  static BooleanQuery any_of(std::vector<BooleanQuery> children);
  static BooleanQuery negate(BooleanQuery child);

  Kind kind() const { return kind_; }
  const std::string& text() const { return text_; }
  const std::vector<BooleanQuery>& children() const { return children_; }

  bool matches(const std::set<std::string>& tokens) const;

  /// Canonical string: uppercase operators, parentheses around nested
  /// groups, quotes around multi-word terms. parse_query(str()) == *this.
  std::string str() const;

  friend bool operator==(const BooleanQuery&, const BooleanQuery&) = default;

 private:
  Kind kind_ = Kind::Term;
  std::string text_;
  std::vector<BooleanQuery> children_;
};

/// Parses `a AND (b OR "c d") NOT e`. NOT binds tightest, then AND, then OR;
/// juxtaposed terms are joined by AND. Throws ParseError with a position.
BooleanQuery parse_query(std::string_view text);

}  // namespace creepdb::corpus
