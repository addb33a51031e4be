#include "secretsweep/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "secretsweep/baseline.hpp"
#include "secretsweep/error.hpp"

using nlohmann::json;

namespace secretsweep {

int label_value(Label l) {
  switch (l) {
    case Label::kSecret:
      return 1;
    case Label::kNotSecret:
      return 0;
    case Label::kUnlabeled:
      break;
  }
  return -1;
}

std::string row_id(const Row& r) { return r.page_id + ":" + std::to_string(r.line_number); }

namespace {

constexpr std::size_t kMinDocFreq = 2;

template <typename T>
std::vector<T> pick(const std::vector<T>& all, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(all[i]);
  return out;
}

void require_both_classes(const std::vector<int>& labels, const char* what) {
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!pos || !neg) {
    throw TrainingError(std::string(what) + " needs both secret and not_secret labels; got only " +
                        (pos ? "secret" : "not_secret"));
  }
}

MetricsReport metrics_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool p = scores[i] >= threshold;
    const bool g = labels[i] == 1;
    (g ? (p ? c.tp : c.fn) : (p ? c.fp : c.tn))++;
  }
  return compute_metrics(c);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json threshold_json(const ThresholdChoice& t) {
  return json{{"value", t.threshold},
              {"recall", round4(t.recall)},
              {"precision", round4(t.precision)},
              {"warning", t.warning}};
}

}  // namespace

CodeTrainingResult train_code_pipeline(const std::vector<Finding>& findings,
                                       const TrainConfig& config) {
  config.validate();
  if (findings.empty()) throw TrainingError("no findings to train on");
  std::vector<int> labels;
  labels.reserve(findings.size());
  for (const auto& f : findings) {
    const int y = label_value(f.label);
    if (y < 0) throw TrainingError("finding " + finding_id(f) + " has no gold label");
    if (f.candidate.empty()) {
      throw TrainingError("finding " + finding_id(f) + " has no candidate text; rescan with plaintext");
    }
    labels.push_back(y);
  }
  require_both_classes(labels, "code training");

  CodeTrainingResult result;
  result.split = stratified_split(labels, config.seed);
  const auto train = pick(findings, result.split.train);
  const auto val = pick(findings, result.split.validation);
  const auto test = pick(findings, result.split.test);
  const auto y_train = pick(labels, result.split.train);
  const auto y_val = pick(labels, result.split.validation);
  const auto y_test = pick(labels, result.split.test);
  if (std::count(y_val.begin(), y_val.end(), 1) == 0) {
    throw TrainingError("validation slice has no secrets; more labeled secrets are needed");
  }

  CodeModel& model = result.model;
  model.spec = fit_code_spec(train);
  const auto dim = model.spec.dimension();
  auto vectors = [&](const std::vector<Finding>& part) {
    std::vector<FeatureVector> out;
    out.reserve(part.size());
    for (const auto& f : part) out.push_back(assemble_code_features(f, file_extension(f.path), model.spec));
    return out;
  };
  const auto x_train = vectors(train);
  const auto x_val = vectors(val);
  const auto x_test = vectors(test);

  const auto fit = train_logistic(make_dataset(x_train, y_train, dim), config);
  model.model = fit.model;
  model.model.spec_fingerprint = fingerprint(model.spec);

  const auto val_scores = to_vector(predict_logistic(model.model, to_sparse_rows(x_val, dim)));
  result.threshold = tune_threshold(val_scores, y_val, config.target_recall);
  model.model.threshold = result.threshold.threshold;
  result.validation = metrics_at(val_scores, y_val, model.model.threshold);
  if (!test.empty()) {
    const auto test_scores = to_vector(predict_logistic(model.model, to_sparse_rows(x_test, dim)));
    result.test = metrics_at(test_scores, y_test, model.model.threshold);
  }

  model.metadata = json{
      {"config", to_json(config)},
      {"sizes",
       {{"train", train.size()},
        {"validation", val.size()},
        {"test", test.size()},
        {"positives", std::count(labels.begin(), labels.end(), 1)},
        {"negatives", std::count(labels.begin(), labels.end(), 0)}}},
      {"training", {{"epochs_run", fit.epochs_run}, {"converged", fit.converged},
                    {"final_loss", fit.loss_history.empty() ? 0.0 : fit.loss_history.back()}}},
      {"threshold", threshold_json(result.threshold)},
      {"metrics", {{"validation", to_json(result.validation)}, {"test", to_json(result.test)}}},
      {"created_at", utc_timestamp()}};
  return result;
}

DocsTrainingResult train_docs_pipeline(const std::vector<Row>& rows, std::size_t synthetic,
                                       const std::vector<SecretTemplate>& templates,
                                       const TrainConfig& config) {
  config.validate();
  if (rows.empty()) throw TrainingError("no rows to train on");
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto& r : rows) {
    const int y = label_value(r.label);
    if (y < 0) throw TrainingError("row " + row_id(r) + " has no label");
    labels.push_back(y);
  }

  DocsTrainingResult result;
  result.split = stratified_split(labels, config.seed);
  auto train = pick(rows, result.split.train);
  auto y_train = pick(labels, result.split.train);
  const auto val = pick(rows, result.split.validation);
  const auto test = pick(rows, result.split.test);
  const auto y_val = pick(labels, result.split.validation);
  const auto y_test = pick(labels, result.split.test);

  if (synthetic > 0) {
    for (auto& r : generate_synthetic_secrets(templates, synthetic, config.seed, default_stopwords())) {
      train.push_back(std::move(r));
      y_train.push_back(1);
    }
  }
  result.synthetic_positives = synthetic;
  require_both_classes(y_train, "docs training");
  if (std::count(y_val.begin(), y_val.end(), 1) == 0) {
    throw TrainingError("validation slice has no secrets; more labeled secrets are needed");
  }

  // Tokens seen in a single training row (mostly the random secret values
  // themselves) are dropped before fitting. Kept, they take most of the row's
  // weight in training yet are always out of vocabulary at prediction time.
  std::map<std::string, std::size_t> df;
  for (const auto& r : train) {
    for (const auto& t : std::set<std::string>(r.tokens.begin(), r.tokens.end())) ++df[t];
  }
  for (auto& r : train) {
    std::erase_if(r.tokens, [&](const std::string& t) { return df[t] < kMinDocFreq; });
  }

  DocsModel& model = result.model;
  std::vector<TokenList> corpus;
  corpus.reserve(train.size());
  for (const auto& r : train) corpus.push_back(r.tokens);
  model.tfidf = fit_tfidf(corpus);
  model.spec_fingerprint = fingerprint(model.tfidf);
  const auto dim = model.tfidf.vocab.size();
  auto vectors = [&](const std::vector<Row>& part) {
    std::vector<FeatureVector> out;
    out.reserve(part.size());
    for (const auto& r : part) out.push_back(transform_tfidf(r.tokens, model.tfidf));
    return out;
  };
  const auto x_train = vectors(train);
  const auto x_val = vectors(val);
  const auto x_test = vectors(test);

  const auto fit = train_gbdt(make_dataset(x_train, y_train, dim), config);
  model.model = fit.model;

  const auto val_scores = to_vector(predict_gbdt(model.model, to_sparse_rows(x_val, dim)));
  result.threshold = tune_threshold(val_scores, y_val, config.target_recall);
  model.model.threshold = result.threshold.threshold;
  result.validation = metrics_at(val_scores, y_val, model.model.threshold);
  if (!test.empty()) {
    const auto test_scores = to_vector(predict_gbdt(model.model, to_sparse_rows(x_test, dim)));
    result.test = metrics_at(test_scores, y_test, model.model.threshold);
  }

  model.metadata = json{
      {"config", to_json(config)},
      {"sizes",
       {{"train", train.size()},
        {"validation", val.size()},
        {"test", test.size()},
        {"positives", std::count(labels.begin(), labels.end(), 1)},
        {"negatives", std::count(labels.begin(), labels.end(), 0)}}},
      {"synthetic_positives", synthetic},
      {"training", {{"positive_weight", fit.positive_weight}, {"trees", fit.model.trees.size()},
                    {"final_loss", fit.loss_history.empty() ? 0.0 : fit.loss_history.back()}}},
      {"threshold", threshold_json(result.threshold)},
      {"metrics", {{"validation", to_json(result.validation)}, {"test", to_json(result.test)}}},
      {"created_at", utc_timestamp()}};
  return result;
}

void apply_weak_labels(std::vector<Row>& rows, const DetectorConfig& config) {
  for (auto& r : rows) {
    if (r.label != Label::kUnlabeled) continue;
    r.label = detect_line(r.raw, config).empty() ? Label::kNotSecret : Label::kSecret;
  }
}

Evaluation evaluate_code_model(const CodeModel& model, std::span<const Finding> findings) {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<int> gold;
  for (const auto& f : findings) {
    ids.push_back(finding_id(f));
    scores.push_back(model.score(f));
    gold.push_back(label_value(f.label));
  }
  return evaluate_scores(ids, scores, gold, model.threshold());
}

Evaluation evaluate_docs_model(const DocsModel& model, std::span<const Row> rows) {
  std::vector<std::string> ids;
  std::vector<double> scores;
  std::vector<int> gold;
  for (const auto& r : rows) {
    ids.push_back(row_id(r));
    scores.push_back(model.score(r.tokens));
    gold.push_back(label_value(r.label));
  }
  return evaluate_scores(ids, scores, gold, model.threshold());
}

}  // namespace secretsweep
