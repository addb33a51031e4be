#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "secretsweep/finding.hpp"

namespace secretsweep {

struct LabelRecord {
  std::string finding_id;
  Label label = Label::kSecret;
  std::string labeled_at;
  std::string annotator;

  bool operator==(const LabelRecord&) const = default;
};

/// Throws FormatError on a bad id or a label other than secret/not_secret.
LabelRecord label_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LabelRecord& r);

/// Append-only JSONL label log; the latest record per finding id wins.
class LabelStore {
 public:
  LabelStore() = default;
  /// Replays an existing log (a missing file is an empty store).
  explicit LabelStore(std::filesystem::path path);

  void append(const LabelRecord& record);
  std::optional<LabelRecord> latest(const std::string& finding_id) const;
  const std::map<std::string, LabelRecord>& current() const { return current_; }
  std::size_t log_size() const { return log_size_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::map<std::string, LabelRecord> current_;
  std::size_t log_size_ = 0;
};

/// Replays a label log without opening it for appends.
std::map<std::string, LabelRecord> replay_labels(const std::filesystem::path& path);

}  // namespace secretsweep
