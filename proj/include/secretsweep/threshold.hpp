#pragma once

#include <span>

namespace secretsweep {

struct ThresholdChoice {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  // Set when the recall target is only reachable by flagging every item.
  bool warning = false;
};

/// Recall-first threshold search. Scores at or above the threshold are flagged.
/// `labels` holds 1 for positives. Throws Error when there are no positives.
ThresholdChoice tune_threshold(std::span<const double> scores, std::span<const int> labels,
                               double target_recall);

}  // namespace secretsweep
