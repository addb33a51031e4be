#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

namespace secretsweep {

enum class Detector { kKeyword, kBase64Entropy, kHexEntropy, kPrivateKey, kAwsKey };

inline constexpr std::array<Detector, 5> kAllDetectors = {
    Detector::kKeyword, Detector::kBase64Entropy, Detector::kHexEntropy,
    Detector::kPrivateKey, Detector::kAwsKey};

std::string_view to_string(Detector d);
/// Throws FormatError for unknown names.
Detector parse_detector(std::string_view name);

enum class Label { kUnlabeled, kSecret, kNotSecret };

std::string_view to_string(Label l);
Label parse_label(std::string_view name);

/// One candidate secret located by a detector.
///
/// `candidate` holds the plaintext value while it is known. Findings loaded from
/// a baseline without its plaintext sidecar carry an empty candidate and rely on
/// `candidate_hash` for identity.
struct Finding {
  std::string path;
  std::size_t line_number = 1;
  Detector detector = Detector::kKeyword;
  std::string candidate;
  std::string candidate_hash;
  double entropy_bits = 0.0;
  Label label = Label::kUnlabeled;
  std::optional<double> score;

  bool operator==(const Finding&) const = default;
};

/// Builds a finding and fills in the derived fields (hash, entropy).
Finding make_finding(std::string path, std::size_t line_number, Detector detector,
                     std::string candidate);

/// Identity used for dedup, diffing and label carry-forward.
inline auto finding_key(const Finding& f) {
  return std::tie(f.path, f.line_number, f.detector, f.candidate_hash);
}

/// Stable 64-hex id over (path, line_number, detector, candidate_hash).
std::string finding_id(const Finding& f);

/// Total order used inside a baseline: path, line, detector, hash.
bool finding_less(const Finding& a, const Finding& b);

}  // namespace secretsweep
