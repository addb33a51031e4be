#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "json.hpp"
#include "secretsweep/features.hpp"

namespace secretsweep {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Labeled design matrix: one row per example, y in {0, 1}.
struct Dataset {
  SparseRows x;
  Eigen::VectorXd y;

  Eigen::Index rows() const { return x.rows(); }
  Eigen::Index features() const { return x.cols(); }
  std::size_t positives() const;
  std::size_t negatives() const { return static_cast<std::size_t>(rows()) - positives(); }
};

/// Throws ShapeError when sizes disagree or a vector exceeds `dimension`.
Dataset make_dataset(std::span<const FeatureVector> vectors, std::span<const int> labels,
                     std::size_t dimension);

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2_lambda = 1.0;
  int n_trees = 100;
  int max_depth = 4;
  double min_child_hessian = 1.0;
  std::optional<double> positive_weight;  // unset: n_neg / n_pos capped at 100
  double target_recall = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + e^z) without overflow.
template <typename Scalar>
Scalar log1p_exp(Scalar z) {
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

/// Log-loss of one example at logit z with label y in {0, 1}.
template <typename Scalar>
Scalar logloss_at(Scalar z, Scalar y) {
  return y * log1p_exp(-z) + (Scalar(1) - y) * log1p_exp(z);
}

}  // namespace secretsweep
