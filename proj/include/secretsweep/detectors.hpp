#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "secretsweep/finding.hpp"

namespace secretsweep {

struct DetectorConfig {
  std::vector<std::string> keyword_denylist = default_denylist();
  std::vector<std::string> placeholders = default_placeholders();
  double base64_threshold = 4.5;
  double hex_threshold = 3.0;
  std::size_t min_candidate_len = 20;
  std::set<Detector> enabled{kAllDetectors.begin(), kAllDetectors.end()};

  static std::vector<std::string> default_denylist();
  static std::vector<std::string> default_placeholders();

  /// Throws FormatError when an invariant does not hold.
  void validate() const;
};

enum class EntropyCharset { kBase64, kHex };

// Detectors take one physical line and return findings with an empty path and
// line number 1; the caller stamps the location.
std::vector<Finding> detect_keyword(std::string_view line, const DetectorConfig& config);
std::vector<Finding> detect_high_entropy(std::string_view line, EntropyCharset charset,
                                         const DetectorConfig& config);
/// `kind` must be Detector::kPrivateKey or Detector::kAwsKey.
std::vector<Finding> detect_pattern(std::string_view line, Detector kind);

/// Runs every enabled detector over the line.
std::vector<Finding> detect_line(std::string_view line, const DetectorConfig& config);

/// Runs a single detector regardless of whether it is enabled in `config`.
std::vector<Finding> run_detector(Detector d, std::string_view line, const DetectorConfig& config);

}  // namespace secretsweep
