#include "secretsweep/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "secretsweep/detectors.hpp"
#include "secretsweep/error.hpp"

namespace secretsweep {

using Kind = PatternNode::Kind;

PatternNode PatternNode::make_literal(char c) {
  PatternNode n;
  n.kind = Kind::kLiteral;
  n.literal = c;
  return n;
}

PatternNode PatternNode::make_class(std::string chars) {
  std::sort(chars.begin(), chars.end());
  chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
  PatternNode n;
  n.kind = Kind::kClass;
  n.members = std::move(chars);
  return n;
}

PatternNode PatternNode::make_concat(std::vector<PatternNode> children) {
  PatternNode n;
  n.kind = Kind::kConcat;
  n.children = std::move(children);
  return n;
}

PatternNode PatternNode::make_alternation(std::vector<PatternNode> children) {
  PatternNode n;
  n.kind = Kind::kAlternation;
  n.children = std::move(children);
  return n;
}

PatternNode PatternNode::make_group(PatternNode child) {
  PatternNode n;
  n.kind = Kind::kGroup;
  n.children.push_back(std::move(child));
  return n;
}

PatternNode PatternNode::make_repeat(PatternNode child, std::size_t min, std::size_t max) {
  PatternNode n;
  n.kind = Kind::kRepeat;
  n.children.push_back(std::move(child));
  n.min = min;
  n.max = max;
  return n;
}

namespace {

constexpr std::string_view kMeta = "\\.()[]{}|*+?^$";

std::string digit_chars() { return "0123456789"; }

std::string word_chars() {
  std::string s;
  for (char c = 'A'; c <= 'Z'; ++c) s.push_back(c);
  for (char c = 'a'; c <= 'z'; ++c) s.push_back(c);
  s += digit_chars();
  s.push_back('_');
  return s;
}

std::string space_chars() { return " \t\n\r\f\v"; }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  PatternNode parse() {
    if (src_.empty()) throw ParseError("empty pattern", 0);
    auto node = alternation();
    if (pos_ < src_.size()) {
      // Only a stray ')' can stop the top-level alternation early.
      throw ParseError("unbalanced parenthesis", pos_);
    }
    return node;
  }

 private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  PatternNode alternation() {
    std::vector<PatternNode> branches;
    branches.push_back(concat());
    while (!at_end() && peek() == '|') {
      ++pos_;
      branches.push_back(concat());
    }
    if (branches.size() == 1) return std::move(branches.front());
    return PatternNode::make_alternation(std::move(branches));
  }

  PatternNode concat() {
    const std::size_t start = pos_;
    std::vector<PatternNode> items;
    while (!at_end() && peek() != '|' && peek() != ')') items.push_back(repeat());
    if (items.empty()) throw ParseError("empty alternative", start);
    if (items.size() == 1) return std::move(items.front());
    return PatternNode::make_concat(std::move(items));
  }

  PatternNode repeat() {
    auto node = atom();
    if (at_end()) return node;
    std::size_t min = 0;
    std::size_t max = 0;
    switch (peek()) {
      case '?':
        min = 0, max = 1, ++pos_;
        break;
      case '*':
        min = 0, max = PatternNode::kUnbounded, ++pos_;
        break;
      case '+':
        min = 1, max = PatternNode::kUnbounded, ++pos_;
        break;
      case '{':
        braces(min, max);
        break;
      default:
        return node;
    }
    if (!at_end() && (peek() == '?' || peek() == '*' || peek() == '+' || peek() == '{')) {
      throw ParseError("unsupported construct: stacked quantifier", pos_);
    }
    return PatternNode::make_repeat(std::move(node), min, max);
  }

  std::size_t number() {
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + static_cast<std::size_t>(peek() - '0');
      if (value > 100000) throw ParseError("quantifier too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError("malformed quantifier", start);
    return value;
  }

  void braces(std::size_t& min, std::size_t& max) {
    const std::size_t open = pos_;
    ++pos_;
    min = number();
    max = min;
    if (!at_end() && peek() == ',') {
      ++pos_;
      max = (!at_end() && peek() == '}') ? PatternNode::kUnbounded : number();
    }
    if (at_end() || peek() != '}') throw ParseError("malformed quantifier", open);
    ++pos_;
    if (min > max) throw ParseError("quantifier minimum exceeds maximum", open);
  }

  PatternNode atom() {
    const std::size_t start = pos_;
    const char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        if (!at_end() && peek() == '?') throw ParseError("unsupported construct: group flags", pos_);
        if (at_end()) throw ParseError("unbalanced parenthesis", start);
        auto inner = alternation();
        if (at_end() || peek() != ')') throw ParseError("unbalanced parenthesis", start);
        ++pos_;
        return PatternNode::make_group(std::move(inner));
      }
      case '[':
        return char_class();
      case '\\':
        return escape_atom();
      case '*':
      case '+':
      case '?':
      case '{':
        throw ParseError("nothing to repeat", start);
      case '.':
      case '^':
      case '$':
        throw ParseError(std::string("unsupported construct '") + c + "'", start);
      default:
        ++pos_;
        return PatternNode::make_literal(c);
    }
  }

  // Parses the escape at pos_ ('\\'). Sets `cls` for class escapes, else returns the literal.
  char escape(std::string& cls) {
    const std::size_t start = pos_;
    ++pos_;
    if (at_end()) throw ParseError("dangling escape", start);
    const char e = peek();
    ++pos_;
    switch (e) {
      case 'd':
        cls = digit_chars();
        return '\0';
      case 'w':
        cls = word_chars();
        return '\0';
      case 's':
        cls = space_chars();
        return '\0';
      default:
        if (kMeta.find(e) != std::string_view::npos || e == '-' || e == '/') return e;
        throw ParseError(std::string("unsupported escape \\") + e, start);
    }
  }

  PatternNode escape_atom() {
    std::string cls;
    const char lit = escape(cls);
    if (!cls.empty()) return PatternNode::make_class(std::move(cls));
    return PatternNode::make_literal(lit);
  }

  PatternNode char_class() {
    const std::size_t open = pos_;
    ++pos_;
    if (!at_end() && peek() == '^') throw ParseError("unsupported construct: negated class", pos_);
    std::string members;
    bool closed = false;
    while (!at_end()) {
      if (peek() == ']') {
        ++pos_;
        closed = true;
        break;
      }
      const std::size_t item = pos_;
      std::string cls;
      char lo = peek();
      if (lo == '\\') {
        lo = escape(cls);
      } else {
        ++pos_;
      }
      if (!cls.empty()) {
        members += cls;
        continue;
      }
      if (pos_ + 1 < src_.size() && peek() == '-' && src_[pos_ + 1] != ']') {
        ++pos_;
        char hi = peek();
        if (hi == '\\') {
          std::string hi_cls;
          hi = escape(hi_cls);
          if (!hi_cls.empty()) throw ParseError("class escape cannot end a range", item);
        } else {
          ++pos_;
        }
        if (static_cast<unsigned char>(lo) > static_cast<unsigned char>(hi)) {
          throw ParseError("reversed range", item);
        }
        for (int ch = static_cast<unsigned char>(lo); ch <= static_cast<unsigned char>(hi); ++ch) {
          members.push_back(static_cast<char>(ch));
        }
      } else {
        members.push_back(lo);
      }
    }
    if (!closed) throw ParseError("unbalanced bracket", open);
    if (members.empty()) throw ParseError("empty class", open);
    return PatternNode::make_class(std::move(members));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void print_class(const std::string& members, std::string& out) {
  auto put = [&](char c) {
    if (c == '\\' || c == ']' || c == '[' || c == '^' || c == '-') out.push_back('\\');
    out.push_back(c);
  };
  out.push_back('[');
  std::size_t i = 0;
  while (i < members.size()) {
    std::size_t j = i;
    while (j + 1 < members.size() &&
           static_cast<unsigned char>(members[j + 1]) == static_cast<unsigned char>(members[j]) + 1) {
      ++j;
    }
    if (j - i >= 2) {
      put(members[i]);
      out.push_back('-');
      put(members[j]);
    } else {
      for (std::size_t k = i; k <= j; ++k) put(members[k]);
    }
    i = j + 1;
  }
  out.push_back(']');
}

void print_node(const PatternNode& n, std::string& out);

void print_wrapped(const PatternNode& n, bool wrap, std::string& out) {
  if (wrap) out.push_back('(');
  print_node(n, out);
  if (wrap) out.push_back(')');
}

void print_node(const PatternNode& n, std::string& out) {
  switch (n.kind) {
    case Kind::kLiteral:
      if (kMeta.find(n.literal) != std::string_view::npos) out.push_back('\\');
      out.push_back(n.literal);
      break;
    case Kind::kClass:
      print_class(n.members, out);
      break;
    case Kind::kConcat:
      for (const auto& c : n.children) print_wrapped(c, c.kind == Kind::kAlternation, out);
      break;
    case Kind::kAlternation:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i > 0) out.push_back('|');
        print_node(n.children[i], out);
      }
      break;
    case Kind::kGroup:
      print_wrapped(n.children.front(), true, out);
      break;
    case Kind::kRepeat: {
      const auto& c = n.children.front();
      const bool wrap = c.kind == Kind::kConcat || c.kind == Kind::kAlternation ||
                        c.kind == Kind::kRepeat;
      print_wrapped(c, wrap, out);
      const bool unbounded = n.max == PatternNode::kUnbounded;
      if (n.min == 0 && n.max == 1) {
        out.push_back('?');
      } else if (n.min == 0 && unbounded) {
        out.push_back('*');
      } else if (n.min == 1 && unbounded) {
        out.push_back('+');
      } else if (unbounded) {
        out += "{" + std::to_string(n.min) + ",}";
      } else if (n.min == n.max) {
        out += "{" + std::to_string(n.min) + "}";
      } else {
        out += "{" + std::to_string(n.min) + "," + std::to_string(n.max) + "}";
      }
      break;
    }
  }
}

std::size_t repeat_upper(const PatternNode& n, std::size_t max_repeat) {
  return n.max == PatternNode::kUnbounded ? std::max(n.min, max_repeat) : n.max;
}

void sample_into(const PatternNode& n, Rng& rng, std::size_t max_repeat, std::string& out) {
  switch (n.kind) {
    case Kind::kLiteral:
      out.push_back(n.literal);
      break;
    case Kind::kClass:
      out.push_back(n.members[uniform_index(rng, n.members.size())]);
      break;
    case Kind::kConcat:
      for (const auto& c : n.children) sample_into(c, rng, max_repeat, out);
      break;
    case Kind::kAlternation:
      sample_into(n.children[uniform_index(rng, n.children.size())], rng, max_repeat, out);
      break;
    case Kind::kGroup:
      sample_into(n.children.front(), rng, max_repeat, out);
      break;
    case Kind::kRepeat: {
      const std::size_t hi = repeat_upper(n, max_repeat);
      const std::size_t count = n.min + uniform_index(rng, hi - n.min + 1);
      for (std::size_t i = 0; i < count; ++i) sample_into(n.children.front(), rng, max_repeat, out);
      break;
    }
  }
}

using StringSet = std::set<std::string>;

void check_capacity(const StringSet& s, std::size_t limit) {
  if (s.size() > limit) {
    throw CapacityError("match set exceeds the limit of " + std::to_string(limit));
  }
}

StringSet product(const StringSet& a, const StringSet& b, std::size_t limit) {
  StringSet out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      out.insert(x + y);
      check_capacity(out, limit);
    }
  }
  return out;
}

StringSet enumerate_node(const PatternNode& n, std::size_t limit, std::size_t max_repeat) {
  StringSet out;
  switch (n.kind) {
    case Kind::kLiteral:
      out.insert(std::string(1, n.literal));
      break;
    case Kind::kClass:
      for (char c : n.members) out.insert(std::string(1, c));
      break;
    case Kind::kConcat:
      out.insert("");
      for (const auto& c : n.children) out = product(out, enumerate_node(c, limit, max_repeat), limit);
      break;
    case Kind::kAlternation:
      for (const auto& c : n.children) {
        auto part = enumerate_node(c, limit, max_repeat);
        out.insert(part.begin(), part.end());
      }
      break;
    case Kind::kGroup:
      return enumerate_node(n.children.front(), limit, max_repeat);
    case Kind::kRepeat: {
      const auto child = enumerate_node(n.children.front(), limit, max_repeat);
      const std::size_t hi = repeat_upper(n, max_repeat);
      StringSet power{""};
      for (std::size_t k = 0; k <= hi; ++k) {
        if (k >= n.min) out.insert(power.begin(), power.end());
        check_capacity(out, limit);
        if (k < hi) power = product(power, child, limit);
      }
      break;
    }
  }
  check_capacity(out, limit);
  return out;
}


PatternNode strip(const PatternNode& n) {
  if (n.kind == Kind::kGroup) return strip(n.children.front());
  PatternNode out = n;
  out.children.clear();
  for (const auto& c : n.children) {
    auto s = strip(c);
    const bool flatten = (n.kind == Kind::kConcat || n.kind == Kind::kAlternation) &&
                         s.kind == n.kind;
    if (flatten) {
      for (auto& gc : s.children) out.children.push_back(std::move(gc));
    } else {
      out.children.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

PatternNode parse_pattern(std::string_view src) { return Parser(src).parse(); }

std::string print_pattern(const PatternNode& ast) {
  std::string out;
  print_node(ast, out);
  return out;
}

PatternNode strip_groups(const PatternNode& ast) { return strip(ast); }

std::string sample(const PatternNode& ast, Rng& rng, std::size_t max_repeat) {
  std::string out;
  sample_into(ast, rng, max_repeat, out);
  return out;
}

std::set<std::string> enumerate_matches(const PatternNode& ast, std::size_t limit,
                                        std::size_t max_repeat) {
  return enumerate_node(ast, limit, max_repeat);
}

std::vector<SecretTemplate> default_secret_catalog() {
  return {
      {"aws-access-key", "AKIA[0-9A-Z]{16}", 1.0},
      {"hex-32", "[0-9a-f]{32}", 1.0},
      {"base64-24", "[A-Za-z0-9+/]{24}", 1.0},
      {"word-digits", "[a-z]{6}\\d{2}", 1.0},
  };
}

std::vector<SecretTemplate> secret_catalog_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("template catalog must be a JSON array");
  std::vector<SecretTemplate> out;
  for (const auto& o : j) {
    try {
      SecretTemplate t{o.at("name").get<std::string>(), o.at("pattern").get<std::string>(),
                       o.value("weight", 1.0)};
      if (!(t.weight > 0.0)) throw FormatError("template '" + t.name + "' needs weight > 0");
      parse_pattern(t.pattern);
      out.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed template: ") + e.what());
    }
  }
  return out;
}

std::vector<Row> generate_synthetic_secrets(const std::vector<SecretTemplate>& templates,
                                            std::size_t n, std::uint64_t seed,
                                            const StopwordSet& stopwords) {
  if (templates.empty()) throw Error("synthetic generation needs at least one template");
  std::vector<PatternNode> asts;
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& t : templates) {
    if (!(t.weight > 0.0)) throw FormatError("template '" + t.name + "' needs weight > 0");
    asts.push_back(parse_pattern(t.pattern));
    total += t.weight;
    cumulative.push_back(total);
  }
  const auto keywords = DetectorConfig::default_denylist();
  Rng rng(seed);
  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    const auto pick = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                 cumulative.begin()),
        asts.size() - 1);
    Row r;
    r.page_id = "synthetic";
    r.line_number = i + 1;
    r.raw = keywords[i % keywords.size()] + " = " + sample(asts[pick], rng);
    r.tokens = normalize_row(r.raw, stopwords);
    r.label = Label::kSecret;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace secretsweep
