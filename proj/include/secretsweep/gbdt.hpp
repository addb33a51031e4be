#pragma once

#include <cstddef>
#include <vector>

#include "secretsweep/dataset.hpp"

namespace secretsweep {

struct TreeNode {
  // Internal nodes send x[feature] < threshold to `left`.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaves only

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0

  double predict(const FeatureVector& fv) const;
  double predict_row(const SparseRows& x, Eigen::Index row) const;
  int depth() const;
  /// Every internal node has two in-range children and the graph is a tree.
  bool well_formed() const;
  bool operator==(const Tree&) const = default;
};

struct GbdtModel {
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  double base_logit = 0.0;
  double threshold = 0.5;
  std::size_t n_features = 0;

  bool operator==(const GbdtModel&) const = default;
};

/// Missing features read as 0.
double predict_gbdt(const GbdtModel& model, const FeatureVector& fv);
Eigen::VectorXd predict_gbdt(const GbdtModel& model, const SparseRows& x);

struct GbdtFit {
  GbdtModel model;
  double positive_weight = 1.0;
  std::vector<double> loss_history;  // weighted mean log-loss, index 0 = base score only
};

/// Second-order boosting on the logistic loss with exact greedy splits.
/// Throws TrainingError on single-class data.
GbdtFit train_gbdt(const Dataset& data, const TrainConfig& config);

/// The positive-class weight train_gbdt will use for this data.
double resolve_positive_weight(const Dataset& data, const TrainConfig& config);

}  // namespace secretsweep
