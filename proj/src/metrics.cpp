#include "secretsweep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "secretsweep/error.hpp"
#include "secretsweep/rng.hpp"

using nlohmann::json;

namespace secretsweep {

MetricsReport compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error("cannot compute metrics from all-zero counts");
  MetricsReport m;
  m.counts = c;
  if (c.tp + c.fp == 0) {
    m.degenerate_flags.insert("precision_undefined");
  } else {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.degenerate_flags.insert("recall_undefined");
  } else {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate_flags.insert("f1_undefined");
  }
  return m;
}

std::string format_2dp(double x) {
  // Half-up; the epsilon absorbs binary representation error on exact halves.
  const double r = std::floor(x * 100.0 + 0.5 + 1e-9) / 100.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r);
  return buf;
}

namespace {
double round4(double x) { return std::round(x * 1e4) / 1e4; }
}  // namespace

json to_json(const MetricsReport& m) {
  return json{{"precision", round4(m.precision)},
              {"recall", round4(m.recall)},
              {"f1", round4(m.f1)},
              {"counts", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn}, {"fn", m.counts.fn}}},
              {"degenerate_flags", m.degenerate_flags}};
}

MetricsReport metrics_from_json(const json& j) {
  try {
    MetricsReport m;
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    const auto& c = j.at("counts");
    m.counts = {c.at("tp").get<std::uint64_t>(), c.at("fp").get<std::uint64_t>(),
                c.at("tn").get<std::uint64_t>(), c.at("fn").get<std::uint64_t>()};
    m.degenerate_flags = j.value("degenerate_flags", std::set<std::string>{});
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed metrics report: ") + e.what());
  }
}

Split stratified_split(std::span<const int> labels, std::uint64_t seed, SplitRatios ratios) {
  if (labels.empty()) throw Error("cannot split an empty dataset");
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0) ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw Error("split ratios must be positive and sum to 1");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

  Rng rng(seed);
  Split split;
  for (auto& [_, members] : by_class) {
    seeded_shuffle(members, rng);
    const auto n = static_cast<double>(members.size());
    const auto cut1 = static_cast<std::size_t>(std::floor(ratios.train * n));
    const auto cut2 = static_cast<std::size_t>(std::floor((ratios.train + ratios.validation) * n));
    split.train.insert(split.train.end(), members.begin(), members.begin() + cut1);
    split.validation.insert(split.validation.end(), members.begin() + cut1, members.begin() + cut2);
    split.test.insert(split.test.end(), members.begin() + cut2, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Evaluation evaluate_scores(std::span<const std::string> ids, std::span<const double> scores,
                           std::span<const int> gold, double threshold) {
  if (ids.size() != scores.size() || ids.size() != gold.size()) {
    throw Error("ids, scores and labels differ in length");
  }
  if (ids.empty()) throw Error("nothing to evaluate: zero items");
  std::vector<std::string> unlabeled;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (gold[i] != 0 && gold[i] != 1) unlabeled.push_back(ids[i]);
  }
  if (!unlabeled.empty()) {
    std::string msg = "unlabeled items present:";
    for (const auto& id : unlabeled) msg += " " + id;
    throw Error(msg);
  }
  Evaluation e;
  e.threshold = threshold;
  ConfusionCounts model;
  ConfusionCounts heuristic;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const bool g = gold[i] == 1;
    const bool p = scores[i] >= threshold;
    e.predictions.push_back({ids[i], scores[i], p, g});
    (g ? (p ? model.tp : model.fn) : (p ? model.fp : model.tn))++;
    (g ? heuristic.tp : heuristic.fp)++;
  }
  e.model = compute_metrics(model);
  e.heuristic = compute_metrics(heuristic);
  return e;
}

std::string format_comparison_table(const MetricsReport& heuristic, const MetricsReport& model,
                                    const std::string& model_name) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %9s %9s %9s\n", "Technique", "Precision", "Recall", "F1");
  out << line;
  auto row = [&](const std::string& name, const MetricsReport& m) {
    std::snprintf(line, sizeof line, "%-28s %9s %9s %9s\n", name.c_str(),
                  format_2dp(m.precision).c_str(), format_2dp(m.recall).c_str(),
                  format_2dp(m.f1).c_str());
    out << line;
  };
  row("Heuristic detectors", heuristic);
  row(model_name, model);
  return out.str();
}

std::string predictions_to_jsonl(std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += json{{"id", p.id}, {"score", p.score}, {"predicted", p.predicted}, {"gold", p.gold}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<Prediction> predictions_from_jsonl(const std::string& text) {
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("score").get<double>(),
                     j.at("predicted").get<bool>(), j.at("gold").get<bool>()});
    } catch (const json::exception& e) {
      throw FormatError("predictions line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

json to_json(const Evaluation& e) {
  return json{{"threshold", e.threshold},
              {"heuristic", to_json(e.heuristic)},
              {"model", to_json(e.model)},
              {"items", e.predictions.size()}};
}

}  // namespace secretsweep
