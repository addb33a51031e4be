#include "secretsweep/detectors.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "secretsweep/entropy.hpp"
#include "secretsweep/error.hpp"

namespace secretsweep {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Chars that end an unquoted keyword value.
bool ends_value(char c) {
  switch (c) {
    case '"':
    case '\'':
    case '`':
    case ';':
    case ',':
    case '(':
    case ')':
    case '[':
    case ']':
    case '{':
    case '}':
      return true;
    default:
      return is_space(c);
  }
}

std::size_t skip_spaces(std::string_view line, std::size_t i) {
  while (i < line.size() && is_space(line[i])) ++i;
  return i;
}

// Length of the separator at `i`, or 0.
std::size_t separator_at(std::string_view line, std::size_t i) {
  if (line.compare(i, 2, ":=") == 0 || line.compare(i, 2, "=>") == 0) return 2;
  if (i < line.size() && (line[i] == '=' || line[i] == ':')) return 1;
  return 0;
}

struct Value {
  std::string text;
  bool call = false;  // unquoted token immediately followed by '('
};

std::optional<Value> value_at(std::string_view line, std::size_t i) {
  if (i >= line.size()) return std::nullopt;
  const char q = line[i];
  if (q == '"' || q == '\'' || q == '`') {
    const auto close = line.find(q, i + 1);
    const auto end = close == std::string_view::npos ? line.size() : close;
    return Value{std::string(line.substr(i + 1, end - i - 1)), false};
  }
  std::size_t j = i;
  while (j < line.size() && !ends_value(line[j])) ++j;
  return Value{std::string(line.substr(i, j - i)), j < line.size() && line[j] == '('};
}

bool in_charset(char c, EntropyCharset charset) {
  const auto u = static_cast<unsigned char>(c);
  if (charset == EntropyCharset::kHex) return std::isxdigit(u) != 0;
  return std::isalnum(u) != 0 || c == '+' || c == '/' || c == '=';
}

}  // namespace

std::vector<std::string> DetectorConfig::default_denylist() {
  return {"password",    "passwd",     "pwd",      "secret",   "token",
          "api_key",     "apikey",     "private_key", "credential", "auth_key"};
}

std::vector<std::string> DetectorConfig::default_placeholders() {
  return {"none", "null", "true", "false", "changeme", "<password>"};
}

void DetectorConfig::validate() const {
  if (base64_threshold < 0.0 || hex_threshold < 0.0) {
    throw FormatError("entropy thresholds must be non-negative");
  }
  if (min_candidate_len < 1) throw FormatError("min_candidate_len must be at least 1");
  if (enabled.contains(Detector::kKeyword) && keyword_denylist.empty()) {
    throw FormatError("keyword detector enabled with an empty denylist");
  }
  for (const auto& k : keyword_denylist) {
    if (k.empty()) throw FormatError("empty keyword in denylist");
  }
}

std::vector<Finding> detect_keyword(std::string_view line, const DetectorConfig& config) {
  std::vector<Finding> out;
  const std::string lower = lowercase(line);
  std::vector<bool> used_end(line.size() + 1, false);

  // Gather (keyword end offset) for every keyword occurrence that ends an identifier.
  std::vector<std::size_t> ends;
  for (const auto& raw_kw : config.keyword_denylist) {
    const std::string kw = lowercase(raw_kw);
    for (auto pos = lower.find(kw); pos != std::string::npos; pos = lower.find(kw, pos + 1)) {
      const std::size_t end = pos + kw.size();
      if (end < line.size() && is_ident_char(line[end])) continue;
      if (!used_end[end]) {
        used_end[end] = true;
        ends.push_back(end);
      }
    }
  }
  std::sort(ends.begin(), ends.end());

  for (std::size_t end : ends) {
    std::size_t i = end;
    if (i < line.size() && (line[i] == '"' || line[i] == '\'')) ++i;  // quoted key
    i = skip_spaces(line, i);
    const std::size_t sep = separator_at(line, i);
    if (sep == 0) continue;
    i = skip_spaces(line, i + sep);
    const auto value = value_at(line, i);
    if (!value || value->call) continue;
    if (value->text.size() < 4) continue;
    const std::string lowered = lowercase(value->text);
    const bool placeholder =
        std::any_of(config.placeholders.begin(), config.placeholders.end(),
                    [&](const std::string& p) { return lowercase(p) == lowered; });
    if (placeholder) continue;
    out.push_back(make_finding("", 1, Detector::kKeyword, value->text));
  }
  return out;
}

namespace {

// True when the run at `pos` is the value of a key naming a digest or an id,
// e.g. `"candidate_hash":"<hex>"` or `sha256: <hex>`. Such values are hashes.
bool follows_digest_key(std::string_view line, std::size_t pos) {
  std::size_t k = pos;
  std::size_t gap = 0;
  while (k > 0 && gap < 4 && std::string_view("\"': =\t").find(line[k - 1]) != std::string_view::npos) {
    --k;
    ++gap;
  }
  if (gap == 0) return false;
  const std::size_t end = k;
  while (k > 0 && (std::isalnum(static_cast<unsigned char>(line[k - 1])) || line[k - 1] == '_' ||
                   line[k - 1] == '-')) {
    --k;
  }
  std::string key(line.substr(k, end - k));
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::string_view suffix : {"hash", "sha1", "sha256", "digest", "checksum", "_id"}) {
    if (key.size() >= suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return true;
    }
  }
  return key == "id";
}

}  // namespace

std::vector<Finding> detect_high_entropy(std::string_view line, EntropyCharset charset,
                                         const DetectorConfig& config) {
  std::vector<Finding> out;
  const double threshold =
      charset == EntropyCharset::kHex ? config.hex_threshold : config.base64_threshold;
  const Detector kind =
      charset == EntropyCharset::kHex ? Detector::kHexEntropy : Detector::kBase64Entropy;
  std::size_t i = 0;
  while (i < line.size()) {
    if (!in_charset(line[i], charset)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && in_charset(line[j], charset)) ++j;
    const auto run = line.substr(i, j - i);
    if (run.size() >= config.min_candidate_len && shannon_entropy(run) >= threshold &&
        !follows_digest_key(line, i)) {
      out.push_back(make_finding("", 1, kind, std::string(run)));
    }
    i = j;
  }
  return out;
}

std::vector<Finding> detect_pattern(std::string_view line, Detector kind) {
  static const std::regex kPrivateKey(R"(-----BEGIN ([A-Z0-9]+ )*PRIVATE KEY-----)");
  static const std::regex kAwsKey(R"(AKIA[0-9A-Z]{16})");
  const std::regex* re = nullptr;
  if (kind == Detector::kPrivateKey) {
    re = &kPrivateKey;
  } else if (kind == Detector::kAwsKey) {
    re = &kAwsKey;
  } else {
    throw Error("detect_pattern supports private-key and aws-key only");
  }
  std::vector<Finding> out;
  // Cheap prefilter; std::regex is slow on long lines.
  if (line.find(kind == Detector::kAwsKey ? "AKIA" : "-----BEGIN ") == std::string_view::npos) {
    return out;
  }
  const std::string text(line);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), *re); it != std::sregex_iterator();
       ++it) {
    out.push_back(make_finding("", 1, kind, it->str()));
  }
  return out;
}

std::vector<Finding> run_detector(Detector d, std::string_view line, const DetectorConfig& config) {
  switch (d) {
    case Detector::kKeyword:
      return detect_keyword(line, config);
    case Detector::kBase64Entropy:
      return detect_high_entropy(line, EntropyCharset::kBase64, config);
    case Detector::kHexEntropy:
      return detect_high_entropy(line, EntropyCharset::kHex, config);
    case Detector::kPrivateKey:
    case Detector::kAwsKey:
      return detect_pattern(line, d);
  }
  return {};
}

std::vector<Finding> detect_line(std::string_view line, const DetectorConfig& config) {
  std::vector<Finding> out;
  for (Detector d : kAllDetectors) {
    if (!config.enabled.contains(d)) continue;
    auto found = run_detector(d, line, config);
    out.insert(out.end(), std::make_move_iterator(found.begin()),
               std::make_move_iterator(found.end()));
  }
  return out;
}

}  // namespace secretsweep
