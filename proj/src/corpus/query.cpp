#include "creepdb/corpus/query.hpp"

#include <cctype>

#include "creepdb/error.hpp"

namespace creepdb::corpus {

namespace {
bool word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && cur.back() == '-') cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (word_char(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (c == '-' && !cur.empty() && i + 1 < text.size() &&
               word_char(static_cast<unsigned char>(text[i + 1]))) {
      cur += '-';
    } else {
      flush();
    }
  }
  flush();
  return out;
}

BooleanQuery BooleanQuery::term(std::string text) {
  auto words = tokenize(text);
  require(!words.empty(), "a query term needs at least one word");
  BooleanQuery q;
  q.kind_ = Kind::Term;
  for (const auto& w : words) q.text_ += (q.text_.empty() ? "" : " ") + w;
  return q;
}

namespace {
BooleanQuery::Kind flatten_kind_check(std::vector<BooleanQuery>& children, BooleanQuery::Kind kind) {
  std::vector<BooleanQuery> flat;
  for (auto& c : children) {
    if (c.kind() == kind)
      flat.insert(flat.end(), c.children().begin(), c.children().end());
    else
      flat.push_back(std::move(c));
  }
  children = std::move(flat);
  require(children.size() >= 2, "AND/OR need at least two operands");
  return kind;
}
}  // namespace

BooleanQuery BooleanQuery::all_of(std::vector<BooleanQuery> children) {
  BooleanQuery q;
  q.kind_ = flatten_kind_check(children, Kind::And);
  q.children_ = std::move(children);
  return q;
}

BooleanQuery BooleanQuery::any_of(std::vector<BooleanQuery> children) {
  BooleanQuery q;
  q.kind_ = flatten_kind_check(children, Kind::Or);
  q.children_ = std::move(children);
  return q;
}

BooleanQuery BooleanQuery::negate(BooleanQuery child) {
  BooleanQuery q;
  q.kind_ = Kind::Not;
  q.children_.push_back(std::move(child));
  return q;
}

bool BooleanQuery::matches(const std::set<std::string>& tokens) const {
  switch (kind_) {
    case Kind::Term:
      for (const auto& t : tokenize(text_))
        if (!tokens.count(t)) return false;
      return true;
    case Kind::And:
      for (const auto& c : children_)
        if (!c.matches(tokens)) return false;
      return true;
    case Kind::Or:
      for (const auto& c : children_)
        if (c.matches(tokens)) return true;
      return false;
    case Kind::Not:
      return !children_.front().matches(tokens);
  }
  return false;
}

std::string BooleanQuery::str() const {
  switch (kind_) {
    case Kind::Term: {
      bool plain = tokenize(text_).size() == 1 && text_.find_first_of(" \t\"()") == std::string::npos &&
                   text_ != "AND" && text_ != "OR" && text_ != "NOT";
      return plain ? text_ : "\"" + text_ + "\"";
    }
    case Kind::Not: {
      const auto& c = children_.front();
      return "NOT " + (c.kind_ == Kind::Term || c.kind_ == Kind::Not ? c.str() : "(" + c.str() + ")");
    }
    case Kind::And:
    case Kind::Or: {
      std::string out;
      const char* op = kind_ == Kind::And ? " AND " : " OR ";
      for (std::size_t i = 0; i < children_.size(); ++i) {
        if (i) out += op;
        const auto& c = children_[i];
        bool wrap = c.kind_ == Kind::And || c.kind_ == Kind::Or;
        out += wrap ? "(" + c.str() + ")" : c.str();
      }
      return out;
    }
  }
  return {};
}

namespace {

struct Token {
  enum Type { Word, Phrase, And, Or, Not, LParen, RParen, End } type;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({Token::RParen, ")", i++});
    } else if (c == '"') {
      std::size_t end = s.find('"', i + 1);
      if (end == std::string_view::npos) throw ParseError(i, "unterminated quote");
      out.push_back({Token::Phrase, std::string(s.substr(i + 1, end - i - 1)), i});
      i = end + 1;
    } else {
      std::size_t start = i;
      while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' &&
             s[i] != ')' && s[i] != '"')
        ++i;
      std::string w(s.substr(start, i - start));
      Token::Type t = w == "AND" ? Token::And : w == "OR" ? Token::Or : w == "NOT" ? Token::Not : Token::Word;
      out.push_back({t, w, start});
    }
  }
  out.push_back({Token::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  BooleanQuery parse() {
    auto q = parse_or(0);
    if (peek().type != Token::End) throw ParseError(peek().pos, "unexpected '" + peek().text + "'");
    return q;
  }

 private:
  static constexpr int kMaxDepth = 64;
  const Token& peek() const { return toks_[i_]; }
  const Token& next() { return toks_[i_++]; }

  static bool starts_operand(Token::Type t) {
    return t == Token::Word || t == Token::Phrase || t == Token::Not || t == Token::LParen;
  }

  BooleanQuery parse_or(int depth) {
    std::vector<BooleanQuery> parts{parse_and(depth)};
    while (peek().type == Token::Or) {
      next();
      parts.push_back(parse_and(depth));
    }
    return parts.size() == 1 ? std::move(parts[0]) : BooleanQuery::any_of(std::move(parts));
  }

  BooleanQuery parse_and(int depth) {
    std::vector<BooleanQuery> parts{parse_unary(depth)};
    while (true) {
      if (peek().type == Token::And) {
        next();
      } else if (!starts_operand(peek().type)) {
        break;
      }
      parts.push_back(parse_unary(depth));
    }
    return parts.size() == 1 ? std::move(parts[0]) : BooleanQuery::all_of(std::move(parts));
  }

  BooleanQuery parse_unary(int depth) {
    if (depth > kMaxDepth) throw ParseError(peek().pos, "query nested too deeply");
    const Token& t = next();
    switch (t.type) {
      case Token::Not:
        return BooleanQuery::negate(parse_unary(depth + 1));
      case Token::LParen: {
        auto q = parse_or(depth + 1);
        if (peek().type != Token::RParen) throw ParseError(peek().pos, "expected ')'");
        next();
        return q;
      }
      case Token::Word:
      case Token::Phrase:
        if (tokenize(t.text).empty()) throw ParseError(t.pos, "empty term");
        return BooleanQuery::term(t.text);
      default:
        throw ParseError(t.pos, t.type == Token::End ? "unexpected end of query"
                                                     : "unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

}  // namespace

BooleanQuery parse_query(std::string_view text) { return Parser(lex(text)).parse(); }

}  // namespace creepdb::corpus
