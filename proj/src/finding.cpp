#include "secretsweep/finding.hpp"

#include <tuple>

#include "secretsweep/entropy.hpp"
#include "secretsweep/error.hpp"
#include "secretsweep/hash.hpp"

namespace secretsweep {

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::kKeyword:
      return "keyword";
    case Detector::kBase64Entropy:
      return "base64-entropy";
    case Detector::kHexEntropy:
      return "hex-entropy";
    case Detector::kPrivateKey:
      return "private-key";
    case Detector::kAwsKey:
      return "aws-key";
  }
  return "unknown";
}

Detector parse_detector(std::string_view name) {
  for (Detector d : kAllDetectors) {
    if (to_string(d) == name) return d;
  }
  throw FormatError("unknown detector '" + std::string(name) + "'");
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::kUnlabeled:
      return "unlabeled";
    case Label::kSecret:
      return "secret";
    case Label::kNotSecret:
      return "not_secret";
  }
  return "unlabeled";
}

Label parse_label(std::string_view name) {
  if (name == "unlabeled") return Label::kUnlabeled;
  if (name == "secret") return Label::kSecret;
  if (name == "not_secret") return Label::kNotSecret;
  throw FormatError("unknown label '" + std::string(name) + "'");
}

Finding make_finding(std::string path, std::size_t line_number, Detector detector,
                     std::string candidate) {
  Finding f;
  f.path = std::move(path);
  f.line_number = line_number;
  f.detector = detector;
  f.candidate_hash = sha256_hex(candidate);
  f.entropy_bits = shannon_entropy(candidate);
  f.candidate = std::move(candidate);
  return f;
}

std::string finding_id(const Finding& f) {
  std::string key = f.path;
  key += '\n';
  key += std::to_string(f.line_number);
  key += '\n';
  key += to_string(f.detector);
  key += '\n';
  key += f.candidate_hash;
  return sha256_hex(key);
}

bool finding_less(const Finding& a, const Finding& b) {
  const auto da = to_string(a.detector);
  const auto db = to_string(b.detector);
  return std::tie(a.path, a.line_number, da, a.candidate_hash) <
         std::tie(b.path, b.line_number, db, b.candidate_hash);
}

}  // namespace secretsweep
