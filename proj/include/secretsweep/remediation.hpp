#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "secretsweep/detectors.hpp"
#include "secretsweep/finding.hpp"

namespace secretsweep {

/// A line rewrite rule. `match` is an ECMAScript regex that declares the named
/// captures (?<var>...) and (?<secret>...); `replacement` substitutes the matched
/// span and may reference ${ref} and any declared capture as ${name}.
class Recipe {
 public:
  Recipe(std::string id, std::string description, std::string file_glob,
         std::vector<std::string> extensions, std::string match, std::string replacement,
         int priority);

  const std::string& id() const { return id_; }
  const std::string& description() const { return description_; }
  const std::string& file_glob() const { return file_glob_; }
  const std::vector<std::string>& extensions() const { return extensions_; }
  const std::string& match_source() const { return match_source_; }
  const std::string& replacement() const { return replacement_; }
  int priority() const { return priority_; }

  /// Extension and glob both accept `path` (an empty list or glob accepts all).
  bool applies_to(std::string_view path) const;

  struct Rewrite {
    std::string new_line;
    std::string var;
    std::string vault_ref;
  };
  /// Rewrites the first match whose `secret` capture hashes to `candidate_hash`.
  std::optional<Rewrite> rewrite(const std::string& line, std::string_view candidate_hash) const;

  /// True when the line already carries this recipe's replacement form.
  bool is_remediated(const std::string& line) const;

 private:
  std::string id_;
  std::string description_;
  std::string file_glob_;
  std::vector<std::string> extensions_;
  std::string match_source_;
  std::string replacement_;
  int priority_ = 0;

  std::regex match_;
  std::vector<std::string> group_names_;  // index i holds the name of group i+1, "" if unnamed
  std::regex remediated_;
};

/// Lowercase, with each run of non-alphanumerics collapsed to one hyphen.
std::string vault_ref_for(std::string_view identifier);

/// Shell-style glob over a path: '*' stays within a segment, '**' crosses
/// segments, '?' matches one character.
bool glob_match(std::string_view pattern, std::string_view path);

std::vector<Recipe> default_recipes();
std::vector<Recipe> recipes_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Recipe& r);

struct Patch {
  std::string path;
  std::size_t line_number = 1;
  std::string old_line;
  std::string new_line;
  std::string recipe_id;
  std::string vault_ref;
  std::string candidate_hash;

  bool operator==(const Patch&) const = default;
};

struct RemediationPlan {
  std::vector<Patch> patches;
  std::vector<Finding> unremediated;
  std::size_t already_remediated = 0;
};

/// Only findings labeled secret are considered. Throws StaleFindingError listing
/// every finding whose line no longer yields its candidate_hash.
RemediationPlan plan_remediation(const std::vector<Finding>& findings,
                                 const std::vector<Recipe>& recipes,
                                 const std::filesystem::path& root,
                                 const DetectorConfig& config = {});

struct RemediationReport {
  std::size_t applied = 0;
  std::size_t skipped = 0;
  std::size_t files_changed = 0;
  bool dry_run = false;
  std::string diff;
};

/// Unified diff (3 context lines) of the plan; files are rewritten through a
/// temp file and rename unless `dry_run`. Patches whose old_line no longer
/// matches the file are skipped. Throws IoError and leaves every file untouched
/// when any write fails.
RemediationReport apply_patches(const std::filesystem::path& root, const std::vector<Patch>& patches,
                                bool dry_run);

nlohmann::json to_json(const RemediationReport& r);

/// Rows {vault_ref, path, line_number, candidate_hash, recipe_id}; never plaintext.
std::vector<nlohmann::json> emit_vault_manifest(const std::vector<Patch>& patches);
std::string manifest_to_jsonl(const std::vector<nlohmann::json>& rows);

/// Standard unified diff between two line sequences with `context` lines.
std::string unified_diff(const std::string& path, const std::vector<std::string>& before,
                         const std::vector<std::string>& after, std::size_t context = 3);

}  // namespace secretsweep
