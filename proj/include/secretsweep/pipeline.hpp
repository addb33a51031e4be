#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "secretsweep/detectors.hpp"
#include "secretsweep/metrics.hpp"
#include "secretsweep/model_file.hpp"
#include "secretsweep/pattern.hpp"
#include "secretsweep/text.hpp"
#include "secretsweep/threshold.hpp"

namespace secretsweep {

/// 1 = secret, 0 = not secret, -1 = unlabeled.
int label_value(Label l);

struct CodeTrainingResult {
  CodeModel model;
  ThresholdChoice threshold;
  Split split;
  MetricsReport validation;
  MetricsReport test;
};

/// 70/10/20 stratified split, spec fit on the train slice, logistic training,
/// threshold tuned on validation, metrics on test. Every finding needs a
/// candidate and a gold label. Throws TrainingError on single-class data.
CodeTrainingResult train_code_pipeline(const std::vector<Finding>& findings,
                                       const TrainConfig& config);

struct DocsTrainingResult {
  DocsModel model;
  ThresholdChoice threshold;
  Split split;
  MetricsReport validation;
  MetricsReport test;
  std::size_t synthetic_positives = 0;
};

/// Same split as the code pipeline; `synthetic` extra secret rows from the
/// template catalog are appended to the train slice only.
DocsTrainingResult train_docs_pipeline(const std::vector<Row>& rows, std::size_t synthetic,
                                       const std::vector<SecretTemplate>& templates,
                                       const TrainConfig& config);

/// Rows without a gold label take the heuristic verdict: secret when any
/// enabled detector fires on the raw line.
void apply_weak_labels(std::vector<Row>& rows, const DetectorConfig& config = {});

std::string row_id(const Row& r);

Evaluation evaluate_code_model(const CodeModel& model, std::span<const Finding> findings);
Evaluation evaluate_docs_model(const DocsModel& model, std::span<const Row> rows);

}  // namespace secretsweep
