#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "secretsweep/dataset.hpp"

namespace secretsweep {

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double threshold = 0.5;
  std::string spec_fingerprint;

  bool operator==(const LogisticModel& o) const {
    return weights == o.weights && bias == o.bias && threshold == o.threshold &&
           spec_fingerprint == o.spec_fingerprint;
  }
};

/// sigma(w . x + b). Throws ShapeError on a dimension mismatch.
double predict_logistic(const LogisticModel& model, const FeatureVector& fv);
Eigen::VectorXd predict_logistic(const LogisticModel& model, const SparseRows& x);

struct LogisticGradient {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double max_abs() const;
};

/// Mean log-loss plus (lambda / 2n) * ||w||^2.
double regularized_logloss(const Eigen::VectorXd& weights, double bias, const Dataset& batch,
                           double l2_lambda);

/// Gradient of regularized_logloss with respect to weights and bias.
LogisticGradient gradient_logloss(const Eigen::VectorXd& weights, double bias,
                                  const Dataset& batch, double l2_lambda);

struct LogisticFit {
  LogisticModel model;
  std::vector<double> loss_history;  // loss before each update, then the final loss
  int epochs_run = 0;
  bool converged = false;
};

/// Full-batch gradient descent from zero; stops after config.epochs or once the
/// gradient's max-norm drops below 1e-6. Throws TrainingError on single-class
/// data and DivergenceError on a non-finite loss.
LogisticFit train_logistic(const Dataset& data, const TrainConfig& config);

}  // namespace secretsweep
