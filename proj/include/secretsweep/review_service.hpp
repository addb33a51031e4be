#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "secretsweep/baseline.hpp"
#include "secretsweep/labels.hpp"
#include "secretsweep/metrics.hpp"
#include "secretsweep/model_file.hpp"

namespace httplib {
class Server;
}

namespace secretsweep {

struct ReviewOptions {
  std::filesystem::path baseline_path;
  std::filesystem::path labels_path;
  std::filesystem::path root = ".";
  std::optional<std::filesystem::path> model_path;
  std::optional<std::filesystem::path> ui_dir;
  DetectorConfig detectors;
  TrainConfig train;
};

/// State behind the review API. Label writes and retraining are serialized
/// through one mutex; reads take the same lock and see a consistent snapshot.
class ReviewService {
 public:
  explicit ReviewService(ReviewOptions options);

  /// Registers /api/* handlers and, when a UI directory exists, / and /assets/*.
  void mount(httplib::Server& server);

  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  Response list_findings(const std::string& status, std::size_t offset, std::size_t limit) const;
  Response post_label(const std::string& body);
  Response stats() const;
  Response retrain();

 private:
  struct Entry {
    Finding finding;
    std::string id;
  };

  Label current_label(const Entry& e) const;
  nlohmann::json finding_view(const Entry& e) const;

  ReviewOptions options_;
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t> index_;
  LabelStore store_;
  std::optional<CodeModel> model_;
  std::optional<MetricsReport> current_metrics_;
  mutable std::mutex mutex_;
};

}  // namespace secretsweep
