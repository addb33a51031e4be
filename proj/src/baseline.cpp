#include "secretsweep/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "secretsweep/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {
namespace {

constexpr std::size_t kBinaryProbe = 8192;

bool looks_binary(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return false;
  std::string head(kBinaryProbe, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return head.find('\0') != std::string::npos;
}

std::vector<std::string> detector_names(const DetectorConfig& config) {
  std::vector<std::string> names;
  for (Detector d : config.enabled) names.emplace_back(to_string(d));
  std::sort(names.begin(), names.end());
  return names;
}

json score_json(const std::optional<double>& s) {
  return s ? json(round4(*s)) : json(nullptr);
}

}  // namespace

double round4(double x) { return std::round(x * 1e4) / 1e4; }

std::size_t Baseline::size() const {
  std::size_t n = 0;
  for (const auto& [_, v] : results) n += v.size();
  return n;
}

std::vector<Finding> Baseline::all_findings() const {
  std::vector<Finding> out;
  out.reserve(size());
  for (const auto& [_, v] : results) out.insert(out.end(), v.begin(), v.end());
  return out;
}

bool Baseline::has_plaintext() const {
  for (const auto& [_, v] : results) {
    for (const auto& f : v) {
      if (f.candidate.empty()) return false;
    }
  }
  return true;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Baseline make_baseline(std::vector<Finding> findings, const DetectorConfig& config,
                       std::string generated_at) {
  Baseline b;
  b.generated_at = std::move(generated_at);
  b.detectors = detector_names(config);
  std::sort(findings.begin(), findings.end(), finding_less);
  findings.erase(std::unique(findings.begin(), findings.end(),
                             [](const Finding& a, const Finding& c) {
                               return finding_key(a) == finding_key(c);
                             }),
                 findings.end());
  for (auto& f : findings) b.results[f.path].push_back(std::move(f));
  return b;
}

std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot read " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failed for " + file.string());
  return lines;
}

ScanReport scan_tree(const fs::path& root, const DetectorConfig& config) {
  config.validate();
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("not a readable directory: " + root.string());
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw IoError("cannot open " + root.string() + ": " + ec.message());

  ScanReport report;
  std::vector<Finding> findings;
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      ++report.warnings;
      ec.clear();
      continue;
    }
    const auto& entry = *it;
    if (entry.is_directory(ec) && entry.path().filename() == ".git") {
      it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(ec)) continue;
    const std::string rel = fs::relative(entry.path(), root, ec).generic_string();
    if (looks_binary(entry.path())) {
      ++report.binary_skipped;
      continue;
    }
    std::vector<std::string> lines;
    try {
      lines = read_lines(entry.path());
    } catch (const IoError&) {
      ++report.warnings;
      continue;
    }
    ++report.files_scanned;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      for (auto& f : detect_line(lines[i], config)) {
        f.path = rel;
        f.line_number = i + 1;
        findings.push_back(std::move(f));
      }
    }
  }
  report.baseline = make_baseline(std::move(findings), config);
  return report;
}

BaselineDiff diff_baselines(const Baseline& old_baseline, Baseline& new_baseline) {
  if (old_baseline.version != new_baseline.version) {
    throw FormatError("baseline version mismatch: " + old_baseline.version + " vs " +
                      new_baseline.version);
  }
  using Key = std::tuple<std::string, std::size_t, Detector, std::string>;
  std::map<Key, const Finding*> old_index;
  for (const auto& [_, v] : old_baseline.results) {
    for (const auto& f : v) old_index.emplace(Key(finding_key(f)), &f);
  }
  BaselineDiff diff;
  std::set<Key> seen;
  for (auto& [_, v] : new_baseline.results) {
    for (auto& f : v) {
      const Key key(finding_key(f));
      seen.insert(key);
      const auto hit = old_index.find(key);
      if (hit == old_index.end()) {
        diff.added.push_back(f);
      } else {
        f.label = hit->second->label;
      }
    }
  }
  for (const auto& [key, f] : old_index) {
    if (!seen.contains(key)) diff.removed.push_back(*f);
  }
  std::sort(diff.removed.begin(), diff.removed.end(), finding_less);
  return diff;
}

json baseline_to_json(const Baseline& b, bool include_plaintext) {
  json results = json::object();
  for (const auto& [path, findings] : b.results) {
    json arr = json::array();
    for (const auto& f : findings) {
      json o = {{"detector", to_string(f.detector)},
                {"line", f.line_number},
                {"candidate_hash", f.candidate_hash},
                {"entropy_bits", round4(f.entropy_bits)},
                {"label", to_string(f.label)},
                {"score", score_json(f.score)}};
      if (include_plaintext) o["candidate"] = f.candidate;
      arr.push_back(std::move(o));
    }
    results[path] = std::move(arr);
  }
  return json{{"version", b.version},
              {"generated_at", b.generated_at},
              {"detectors", b.detectors},
              {"results", std::move(results)}};
}

Baseline baseline_from_json(const json& j) {
  try {
    Baseline b;
    b.version = j.at("version").get<std::string>();
    if (b.version != kBaselineVersion) throw FormatError("unsupported baseline version " + b.version);
    b.generated_at = j.at("generated_at").get<std::string>();
    b.detectors = j.at("detectors").get<std::vector<std::string>>();
    for (const auto& [path, arr] : j.at("results").items()) {
      auto& out = b.results[path];
      for (const auto& o : arr) {
        Finding f;
        f.path = path;
        f.line_number = o.at("line").get<std::size_t>();
        if (f.line_number < 1) throw FormatError("line numbers start at 1");
        f.detector = parse_detector(o.at("detector").get<std::string>());
        f.candidate_hash = o.at("candidate_hash").get<std::string>();
        f.entropy_bits = o.at("entropy_bits").get<double>();
        f.label = parse_label(o.at("label").get<std::string>());
        if (!o.at("score").is_null()) f.score = o.at("score").get<double>();
        if (o.contains("candidate")) f.candidate = o.at("candidate").get<std::string>();
        out.push_back(std::move(f));
      }
      std::sort(out.begin(), out.end(), finding_less);
    }
    return b;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed baseline: ") + e.what());
  }
}

std::string dump_baseline(const Baseline& b, bool include_plaintext) {
  return baseline_to_json(b, include_plaintext).dump(2) + "\n";
}

void write_baseline(const fs::path& path, const Baseline& b, bool include_plaintext) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_baseline(b, include_plaintext);
  if (!out) throw IoError("write failed for " + path.string());
}

Baseline read_baseline(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return baseline_from_json(j);
}

fs::path plaintext_sidecar_path(const fs::path& baseline_path) {
  fs::path p = baseline_path;
  p.replace_extension(".plaintext.json");
  return p;
}

std::size_t recover_candidates(Baseline& b, const fs::path& root, const DetectorConfig& config) {
  std::size_t recovered = 0;
  for (auto& [path, findings] : b.results) {
    std::vector<std::string> lines;
    try {
      lines = read_lines(root / path);
    } catch (const IoError&) {
      continue;
    }
    for (auto& f : findings) {
      if (!f.candidate.empty() || f.line_number == 0 || f.line_number > lines.size()) continue;
      for (auto& c : run_detector(f.detector, lines[f.line_number - 1], config)) {
        if (c.candidate_hash == f.candidate_hash) {
          f.candidate = std::move(c.candidate);
          ++recovered;
          break;
        }
      }
    }
  }
  return recovered;
}

}  // namespace secretsweep
