#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace secretsweep {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  // Any of "precision_undefined", "recall_undefined", "f1_undefined".
  std::set<std::string> degenerate_flags;

  bool operator==(const MetricsReport&) const = default;
};

/// Throws Error when every count is zero.
MetricsReport compute_metrics(const ConfusionCounts& counts);

/// Half-up rounding to two decimals, as shown in comparison tables.
std::string format_2dp(double x);

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

/// Per-class seeded shuffle, then cuts at floor(r_train * n) and
/// floor((r_train + r_val) * n). Indices in each part are ascending.
Split stratified_split(std::span<const int> labels, std::uint64_t seed, SplitRatios ratios = {});

struct Prediction {
  std::string id;
  double score = 0.0;
  bool predicted = false;
  bool gold = false;
};

struct Evaluation {
  MetricsReport heuristic;  // every detection counted as a positive prediction
  MetricsReport model;
  double threshold = 0.0;
  std::vector<Prediction> predictions;
};

/// Tallies thresholded scores against gold labels (1 = secret, 0 = not secret,
/// -1 = unlabeled). Throws Error on empty input or when any item is unlabeled.
Evaluation evaluate_scores(std::span<const std::string> ids, std::span<const double> scores,
                           std::span<const int> gold, double threshold);

/// Two-row comparison table: heuristic detector vs model.
std::string format_comparison_table(const MetricsReport& heuristic, const MetricsReport& model,
                                    const std::string& model_name = "Secret detection model");

/// One JSON object per prediction: {id, score, predicted, gold}.
std::string predictions_to_jsonl(std::span<const Prediction> predictions);
std::vector<Prediction> predictions_from_jsonl(const std::string& text);

nlohmann::json to_json(const Evaluation& e);

}  // namespace secretsweep
