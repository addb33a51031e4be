#include "secretsweep/threshold.hpp"

#include <algorithm>
#include <vector>

#include "secretsweep/error.hpp"

namespace secretsweep {

ThresholdChoice tune_threshold(std::span<const double> scores, std::span<const int> labels,
                               double target_recall) {
  if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) throw Error("recall is undefined without positive labels");

  // Sweep thresholds from high to low over (score, label) sorted by score descending.
  std::vector<std::pair<double, int>> items;
  items.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) items.emplace_back(scores[i], labels[i]);
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  ThresholdChoice best;
  bool found = false;
  std::size_t tp = 0;
  std::size_t flagged = 0;
  auto consider = [&](double threshold) {
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    if (recall < target_recall) return;
    const double precision =
        flagged == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(flagged);
    // Candidates arrive in descending order, so ties keep the higher threshold.
    if (!found || precision > best.precision) {
      best = {threshold, recall, precision, flagged == items.size()};
      found = true;
    }
  };
  std::size_t i = 0;
  while (i < items.size()) {
    const double s = items[i].first;
    while (i < items.size() && items[i].first == s) {
      tp += items[i].second == 1 ? 1 : 0;
      ++flagged;
      ++i;
    }
    consider(s);
  }
  if (items.empty() || items.back().first > 0.0) consider(0.0);
  if (!found) return {0.0, 1.0, static_cast<double>(positives) / static_cast<double>(items.size()),
                      true};
  return best;
}

}  // namespace secretsweep
