#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "secretsweep/detectors.hpp"
#include "secretsweep/finding.hpp"

namespace secretsweep {

inline constexpr const char* kBaselineVersion = "1.0";

struct Baseline {
  std::string version = kBaselineVersion;
  std::string generated_at;
  std::vector<std::string> detectors;
  // std::map keeps paths in lexicographic order; each vector is kept sorted by
  // finding_less.
  std::map<std::string, std::vector<Finding>> results;

  std::size_t size() const;
  std::vector<Finding> all_findings() const;
  bool has_plaintext() const;
};

struct ScanReport {
  Baseline baseline;
  std::size_t files_scanned = 0;
  std::size_t binary_skipped = 0;
  std::size_t warnings = 0;  // unreadable files
};

/// Current UTC time as an ISO-8601 string with a trailing Z.
std::string utc_timestamp();

/// Sorts and deduplicates findings into a baseline.
Baseline make_baseline(std::vector<Finding> findings, const DetectorConfig& config,
                       std::string generated_at = utc_timestamp());

/// Scans every regular file under `root`. Throws IoError when root is not a readable directory.
ScanReport scan_tree(const std::filesystem::path& root, const DetectorConfig& config);

struct BaselineDiff {
  std::vector<Finding> added;
  std::vector<Finding> removed;
};

/// Set difference keyed on finding_key. Labels of findings present in both are
/// copied from `old_baseline` into `new_baseline`.
BaselineDiff diff_baselines(const Baseline& old_baseline, Baseline& new_baseline);

/// Serialized form. With `include_plaintext` each finding also carries "candidate".
nlohmann::json baseline_to_json(const Baseline& b, bool include_plaintext = false);
Baseline baseline_from_json(const nlohmann::json& j);

std::string dump_baseline(const Baseline& b, bool include_plaintext = false);
void write_baseline(const std::filesystem::path& path, const Baseline& b,
                    bool include_plaintext = false);
Baseline read_baseline(const std::filesystem::path& path);

/// Path of the plaintext sidecar written next to a baseline file.
std::filesystem::path plaintext_sidecar_path(const std::filesystem::path& baseline_path);

/// Reads the file at root/path and returns its lines (without terminators).
std::vector<std::string> read_lines(const std::filesystem::path& file);

/// Fills in empty candidates by re-running the finding's detector on the
/// referenced line and matching candidate_hash. Returns how many were recovered.
std::size_t recover_candidates(Baseline& b, const std::filesystem::path& root,
                               const DetectorConfig& config);

/// Rounds to four decimals, the precision used in serialized reports.
double round4(double x);

}  // namespace secretsweep
