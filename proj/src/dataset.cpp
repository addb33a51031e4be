#include "secretsweep/dataset.hpp"

#include "secretsweep/error.hpp"

using nlohmann::json;

namespace secretsweep {

std::size_t Dataset::positives() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) n += y(i) > 0.5 ? 1 : 0;
  return n;
}

Dataset make_dataset(std::span<const FeatureVector> vectors, std::span<const int> labels,
                     std::size_t dimension) {
  if (vectors.size() != labels.size()) throw ShapeError("feature and label counts differ");
  Dataset d;
  d.x = to_sparse_rows(vectors, dimension);
  d.y.resize(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ShapeError("labels must be 0 or 1");
    d.y(static_cast<Eigen::Index>(i)) = labels[i];
  }
  return d;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate must be positive");
  if (epochs < 0) throw Error("epochs must be non-negative");
  if (l2_lambda < 0.0) throw Error("l2_lambda must be non-negative");
  if (n_trees < 0) throw Error("n_trees must be non-negative");
  if (max_depth < 0) throw Error("max_depth must be non-negative");
  if (min_child_hessian < 0.0) throw Error("min_child_hessian must be non-negative");
  if (positive_weight && !(*positive_weight > 0.0)) throw Error("positive_weight must be positive");
  if (!(target_recall > 0.0 && target_recall <= 1.0)) throw Error("target_recall must be in (0, 1]");
}

json to_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate},
              {"epochs", c.epochs},
              {"l2_lambda", c.l2_lambda},
              {"n_trees", c.n_trees},
              {"max_depth", c.max_depth},
              {"min_child_hessian", c.min_child_hessian},
              {"positive_weight", c.positive_weight ? json(*c.positive_weight) : json(nullptr)},
              {"target_recall", c.target_recall},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
  c.n_trees = j.value("n_trees", c.n_trees);
  c.max_depth = j.value("max_depth", c.max_depth);
  c.min_child_hessian = j.value("min_child_hessian", c.min_child_hessian);
  if (j.contains("positive_weight") && !j.at("positive_weight").is_null()) {
    c.positive_weight = j.at("positive_weight").get<double>();
  }
  c.target_recall = j.value("target_recall", c.target_recall);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

}  // namespace secretsweep
