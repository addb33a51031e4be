#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "secretsweep/rng.hpp"
#include "secretsweep/text.hpp"

namespace secretsweep {

/// AST for the supported regular-expression subset.
struct PatternNode {
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  enum class Kind { kLiteral, kClass, kConcat, kAlternation, kGroup, kRepeat };

  Kind kind = Kind::kLiteral;
  char literal = '\0';
  std::string members;  // kClass: sorted, unique bytes
  std::vector<PatternNode> children;
  std::size_t min = 0;
  std::size_t max = 0;  // kUnbounded for * and +

  static PatternNode make_literal(char c);
  static PatternNode make_class(std::string chars);
  static PatternNode make_concat(std::vector<PatternNode> children);
  static PatternNode make_alternation(std::vector<PatternNode> children);
  static PatternNode make_group(PatternNode child);
  static PatternNode make_repeat(PatternNode child, std::size_t min, std::size_t max);

  bool operator==(const PatternNode&) const = default;
};

/// Parses the subset: literals, \d \w \s and escaped metacharacters, classes with
/// ranges (no negation), groups, alternation, and ? * + {m} {m,} {m,n}.
/// Throws ParseError naming the offending offset.
PatternNode parse_pattern(std::string_view src);

/// Canonical source text for an AST; parse_pattern(print_pattern(a)) matches the same language.
std::string print_pattern(const PatternNode& ast);

/// Removes group nodes, which carry no meaning beyond precedence.
PatternNode strip_groups(const PatternNode& ast);

inline constexpr std::size_t kDefaultMaxRepeat = 8;

/// Draws one matching string. Unbounded repeats pick a length uniformly from
/// [min, max(min, max_repeat)]; every other choice point is uniform.
std::string sample(const PatternNode& ast, Rng& rng, std::size_t max_repeat = kDefaultMaxRepeat);

/// Exact match set with unbounded repeats capped at max_repeat. Throws
/// CapacityError as soon as any intermediate set grows beyond `limit`.
std::set<std::string> enumerate_matches(const PatternNode& ast, std::size_t limit,
                                        std::size_t max_repeat = kDefaultMaxRepeat);

struct SecretTemplate {
  std::string name;
  std::string pattern;
  double weight = 1.0;
};

std::vector<SecretTemplate> default_secret_catalog();
/// JSON array of {name, pattern, weight}; every pattern must parse and weight > 0.
std::vector<SecretTemplate> secret_catalog_from_json(const nlohmann::json& j);

/// n secret-labeled rows of the form "<keyword> = <sample>", keywords rotating
/// through the default denylist.
std::vector<Row> generate_synthetic_secrets(const std::vector<SecretTemplate>& templates,
                                            std::size_t n, std::uint64_t seed,
                                            const StopwordSet& stopwords = default_stopwords());

}  // namespace secretsweep
