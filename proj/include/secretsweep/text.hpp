#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "secretsweep/features.hpp"
#include "secretsweep/finding.hpp"

namespace secretsweep {

struct Page {
  std::string id;
  std::string title;
  std::string html;
  std::optional<std::string> space;

  bool operator==(const Page&) const = default;
};

/// One extracted text line of a page.
struct Row {
  std::string page_id;
  std::size_t line_number = 1;
  std::string raw;
  TokenList tokens;
  Label label = Label::kUnlabeled;

  bool operator==(const Row&) const = default;
};

using StopwordSet = std::set<std::string, std::less<>>;

/// Best-effort markup stripping with block tags mapped to line breaks.
std::string html_to_text(std::string_view html);

/// Replaces URLs, emails, IPv4 addresses, long hex runs and standalone numbers
/// with the placeholder words urltok, emailtok, iptok, hextok, numtok.
std::string mask_technical(std::string_view text);

const StopwordSet& default_stopwords();
/// One word per line; blank lines and lines starting with '#' are ignored.
StopwordSet load_stopwords(const std::filesystem::path& file);

/// Porter (1980) stemmer, reference-implementation variant. Expects lowercase ASCII.
std::string porter_stem(std::string_view word);

TokenList normalize_row(std::string_view text, const StopwordSet& stopwords = default_stopwords());

std::vector<Row> page_to_rows(const Page& page, const StopwordSet& stopwords = default_stopwords());

}  // namespace secretsweep
