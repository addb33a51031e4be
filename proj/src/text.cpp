#include "secretsweep/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "secretsweep/error.hpp"

namespace secretsweep {
namespace {

bool iequals_prefix(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) !=
        std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool is_block_tag(std::string_view name) {
  static const std::set<std::string, std::less<>> kBlock = {
      "p", "div", "br", "li", "tr", "h1", "h2", "h3", "h4", "h5", "h6", "table"};
  return kBlock.contains(name);
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at html[pos] == '&'. Returns characters consumed, 0 if none.
std::size_t decode_entity(std::string_view html, std::size_t pos, std::string& out) {
  const auto semi = html.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 12) return 0;
  const auto body = html.substr(pos + 1, semi - pos - 1);
  static const std::pair<std::string_view, char> kNamed[] = {
      {"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}};
  for (const auto& [name, ch] : kNamed) {
    if (body == name) {
      out.push_back(ch);
      return semi - pos + 1;
    }
  }
  if (body.size() >= 2 && body[0] == '#') {
    const bool hex = body[1] == 'x' || body[1] == 'X';
    const auto digits = body.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    unsigned long cp = 0;
    for (char c : digits) {
      const auto u = static_cast<unsigned char>(c);
      if (hex ? !std::isxdigit(u) : !std::isdigit(u)) return 0;
      cp = cp * (hex ? 16 : 10) +
           static_cast<unsigned long>(std::isdigit(u) ? c - '0' : std::tolower(u) - 'a' + 10);
      if (cp > 0x10FFFF) return 0;
    }
    append_utf8(out, cp);
    return semi - pos + 1;
  }
  return 0;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::string html_to_text(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    const char c = html[i];
    if (c == '&') {
      const auto used = decode_entity(html, i, out);
      if (used > 0) {
        i += used;
      } else {
        out.push_back(c);
        ++i;
      }
      continue;
    }
    if (c != '<') {
      out.push_back(c == '\r' ? '\n' : c);
      ++i;
      continue;
    }
    if (html.compare(i, 4, "<!--") == 0) {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    if (html.compare(i, 9, "<![CDATA[") == 0) {
      const auto end = html.find("]]>", i + 9);
      const auto stop = end == std::string_view::npos ? html.size() : end;
      out.append(html.substr(i + 9, stop - i - 9));
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    const auto close = html.find('>', i);
    if (close == std::string_view::npos) {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t n = i + 1;
    const bool closing = n < close && html[n] == '/';
    if (closing) ++n;
    std::string name;
    while (n < close && (std::isalnum(static_cast<unsigned char>(html[n])) || html[n] == ':' ||
                         html[n] == '-')) {
      name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(html[n]))));
      ++n;
    }
    i = close + 1;
    if (is_block_tag(name)) out.push_back('\n');
    if (!closing && (name == "script" || name == "style")) {
      const std::string end_tag = "</" + name;
      std::size_t p = i;
      while (p < html.size() && !iequals_prefix(html, p, end_tag)) ++p;
      const auto gt = html.find('>', p);
      i = gt == std::string_view::npos ? html.size() : gt + 1;
    }
  }

  // Collapse every run of line breaks (and whitespace-only lines) into one break.
  std::string result;
  result.reserve(out.size());
  std::istringstream lines(out);
  std::string line;
  while (std::getline(lines, line)) {
    if (is_blank(line)) continue;
    if (!result.empty()) result.push_back('\n');
    result += line;
  }
  return result;
}

std::string mask_technical(std::string_view text) {
  static const std::regex kUrl(R"([A-Za-z][A-Za-z0-9+.\-]*://\S+)");
  static const std::regex kEmail(R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)+)");
  static const std::regex kIpv4(R"(\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b)");
  static const std::regex kHex(R"(\b[0-9A-Fa-f]{16,}\b)");
  static const std::regex kNumber(R"(\b\d+\b)");
  std::string s(text);
  const bool has_digit = std::any_of(s.begin(), s.end(),
                                     [](unsigned char c) { return std::isdigit(c) != 0; });
  if (s.find("://") != std::string::npos) s = std::regex_replace(s, kUrl, "urltok");
  if (s.find('@') != std::string::npos) s = std::regex_replace(s, kEmail, "emailtok");
  if (has_digit) s = std::regex_replace(s, kIpv4, "iptok");
  s = std::regex_replace(s, kHex, "hextok");
  if (has_digit) s = std::regex_replace(s, kNumber, "numtok");
  return s;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet kWords = {
      "a",       "about",  "above",  "after",   "again",  "against", "all",     "am",
      "an",      "and",    "any",    "are",     "as",     "at",      "be",      "because",
      "been",    "before", "being",  "below",   "between", "both",   "but",     "by",
      "can",     "could",  "did",    "do",      "does",   "doing",   "down",    "during",
      "each",    "few",    "for",    "from",    "further", "had",    "has",     "have",
      "having",  "he",     "her",    "here",    "hers",   "herself", "him",     "himself",
      "his",     "how",    "i",      "if",      "in",     "into",    "is",      "it",
      "its",     "itself", "just",   "me",      "more",   "most",    "my",      "myself",
      "no",      "nor",    "not",    "now",     "of",     "off",     "on",      "once",
      "only",    "or",     "other",  "our",     "ours",   "ourselves", "out",   "over",
      "own",     "same",   "she",    "should",  "so",     "some",    "such",    "than",
      "that",    "the",    "their",  "theirs",  "them",   "themselves", "then", "there",
      "these",   "they",   "this",   "those",   "through", "to",     "too",     "under",
      "until",   "up",     "very",   "was",     "we",     "were",    "what",    "when",
      "where",   "which",  "while",  "who",     "whom",   "why",     "will",    "with",
      "would",   "you",    "your",   "yours",   "yourself", "yourselves"};
  return kWords;
}

StopwordSet load_stopwords(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read stopword file " + file.string());
  StopwordSet words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::string w = line.substr(start);
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(std::move(w));
  }
  return words;
}

TokenList normalize_row(std::string_view text, const StopwordSet& stopwords) {
  std::string s = mask_technical(text);
  for (char& c : s) {
    const auto lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const bool keep = (lower >= 'a' && lower <= 'z') || (lower >= '0' && lower <= '9') ||
                      lower == '_' || lower == ' ';
    c = keep ? lower : ' ';
  }
  TokenList out;
  for (auto& t : tokenize(s)) {
    if (stopwords.contains(t)) continue;
    out.push_back(porter_stem(t));
  }
  return out;
}

std::vector<Row> page_to_rows(const Page& page, const StopwordSet& stopwords) {
  std::vector<Row> rows;
  std::istringstream lines(html_to_text(page.html));
  std::string line;
  while (std::getline(lines, line)) {
    if (is_blank(line)) continue;
    Row r;
    r.page_id = page.id;
    r.line_number = rows.size() + 1;
    r.tokens = normalize_row(line, stopwords);
    r.raw = std::move(line);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace secretsweep
