#include "secretsweep/labels.hpp"

#include <algorithm>
#include <fstream>

#include "secretsweep/baseline.hpp"
#include "secretsweep/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace secretsweep {

LabelRecord label_record_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("label record must be an object");
  LabelRecord r;
  try {
    r.finding_id = j.at("finding_id").get<std::string>();
    const auto label = j.at("label").get<std::string>();
    if (label == "secret") {
      r.label = Label::kSecret;
    } else if (label == "not_secret") {
      r.label = Label::kNotSecret;
    } else {
      throw FormatError("label must be secret or not_secret, got '" + label + "'");
    }
    r.labeled_at = j.value("labeled_at", std::string{});
    r.annotator = j.value("annotator", std::string{});
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed label record: ") + e.what());
  }
  const bool hex = r.finding_id.size() == 64 &&
                   std::all_of(r.finding_id.begin(), r.finding_id.end(), [](char c) {
                     return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                   });
  if (!hex) throw FormatError("finding_id must be 64 lowercase hex characters");
  return r;
}

json to_json(const LabelRecord& r) {
  return json{{"finding_id", r.finding_id},
              {"label", to_string(r.label)},
              {"labeled_at", r.labeled_at},
              {"annotator", r.annotator}};
}

std::map<std::string, LabelRecord> replay_labels(const fs::path& path) {
  std::map<std::string, LabelRecord> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::error_code ec;
    if (!fs::exists(path, ec)) return out;
    throw IoError("cannot read " + path.string());
  }
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      auto r = label_record_from_json(json::parse(line));
      out[r.finding_id] = std::move(r);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

LabelStore::LabelStore(fs::path path) : path_(std::move(path)) {
  current_ = replay_labels(path_);
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ++log_size_;
  }
}

void LabelStore::append(const LabelRecord& record) {
  LabelRecord r = record;
  if (r.labeled_at.empty()) r.labeled_at = utc_timestamp();
  // Validates the id and label before anything is written.
  r = label_record_from_json(to_json(r));
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to " + path_.string());
    out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw IoError("append failed for " + path_.string());
  }
  ++log_size_;
  current_[r.finding_id] = std::move(r);
}

std::optional<LabelRecord> LabelStore::latest(const std::string& finding_id) const {
  auto it = current_.find(finding_id);
  if (it == current_.end()) return std::nullopt;
  return it->second;
}

}  // namespace secretsweep
