#include "secretsweep/logistic.hpp"

#include <cmath>

#include "secretsweep/error.hpp"

namespace secretsweep {
namespace {

constexpr double kGradientTolerance = 1e-6;

Eigen::VectorXd logits(const Eigen::VectorXd& w, double b, const SparseRows& x) {
  Eigen::VectorXd z = x * w;
  z.array() += b;
  return z;
}

}  // namespace

double predict_logistic(const LogisticModel& model, const FeatureVector& fv) {
  if (fv.dimension != static_cast<std::size_t>(model.weights.size())) {
    throw ShapeError("feature dimension " + std::to_string(fv.dimension) +
                     " does not match model dimension " + std::to_string(model.weights.size()));
  }
  double z = model.bias;
  for (const auto& [i, v] : fv.entries) z += model.weights(static_cast<Eigen::Index>(i)) * v;
  return sigmoid(z);
}

Eigen::VectorXd predict_logistic(const LogisticModel& model, const SparseRows& x) {
  if (x.cols() != model.weights.size()) throw ShapeError("feature dimension mismatch");
  return logits(model.weights, model.bias, x).unaryExpr([](double z) { return sigmoid(z); });
}

double LogisticGradient::max_abs() const {
  const double w = weights.size() > 0 ? weights.cwiseAbs().maxCoeff() : 0.0;
  return std::max(w, std::abs(bias));
}

double regularized_logloss(const Eigen::VectorXd& weights, double bias, const Dataset& batch,
                           double l2_lambda) {
  const auto n = static_cast<double>(batch.rows());
  const Eigen::VectorXd z = logits(weights, bias, batch.x);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) loss += logloss_at(z(i), batch.y(i));
  return loss / n + l2_lambda / (2.0 * n) * weights.squaredNorm();
}

LogisticGradient gradient_logloss(const Eigen::VectorXd& weights, double bias, const Dataset& batch,
                                  double l2_lambda) {
  if (batch.rows() == 0) throw Error("gradient of an empty batch");
  const auto n = static_cast<double>(batch.rows());
  const Eigen::VectorXd residual =
      logits(weights, bias, batch.x).unaryExpr([](double z) { return sigmoid(z); }) - batch.y;
  LogisticGradient g;
  g.weights = (batch.x.transpose() * residual) / n + (l2_lambda / n) * weights;
  g.bias = residual.sum() / n;
  return g;
}

LogisticFit train_logistic(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.rows() == 0) throw TrainingError("cannot train on an empty dataset");
  if (data.positives() == 0 || data.negatives() == 0) {
    throw TrainingError("training data must contain both secret and non-secret examples");
  }
  LogisticFit fit;
  auto& m = fit.model;
  m.weights = Eigen::VectorXd::Zero(data.features());
  m.bias = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = regularized_logloss(m.weights, m.bias, data, config.l2_lambda);
    if (!std::isfinite(loss)) {
      throw DivergenceError("training loss became non-finite; try a smaller learning rate");
    }
    fit.loss_history.push_back(loss);
    const auto g = gradient_logloss(m.weights, m.bias, data, config.l2_lambda);
    if (g.max_abs() < kGradientTolerance) {
      fit.converged = true;
      break;
    }
    m.weights -= config.learning_rate * g.weights;
    m.bias -= config.learning_rate * g.bias;
    ++fit.epochs_run;
  }
  const double final_loss = regularized_logloss(m.weights, m.bias, data, config.l2_lambda);
  if (!std::isfinite(final_loss) || !m.weights.allFinite() || !std::isfinite(m.bias)) {
    throw DivergenceError("training diverged; try a smaller learning rate");
  }
  if (!fit.converged) fit.loss_history.push_back(final_loss);
  return fit;
}

}  // namespace secretsweep
