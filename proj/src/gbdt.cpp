#include "secretsweep/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "secretsweep/error.hpp"

namespace secretsweep {
namespace {

constexpr double kMaxPositiveWeight = 100.0;

struct ColumnEntry {
  double value;
  Eigen::Index row;
};

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
};

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy tree builder over a presorted column view of the data.
class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TrainConfig& config)
      : config_(config), n_(data.rows()), in_node_(static_cast<std::size_t>(data.rows()), 0) {
    const Eigen::SparseMatrix<double, Eigen::ColMajor> cols = data.x;
    columns_.resize(static_cast<std::size_t>(cols.cols()));
    for (Eigen::Index j = 0; j < cols.outerSize(); ++j) {
      auto& col = columns_[static_cast<std::size_t>(j)];
      for (Eigen::SparseMatrix<double, Eigen::ColMajor>::InnerIterator it(cols, j); it; ++it) {
        if (it.value() != 0.0) col.push_back({it.value(), it.row()});
      }
      std::stable_sort(col.begin(), col.end(),
                       [](const ColumnEntry& a, const ColumnEntry& b) { return a.value < b.value; });
    }
  }

  // Grows one tree; `leaf_value[i]` receives the leaf weight reached by row i.
  Tree build(const std::vector<double>& grad, const std::vector<double>& hess,
             std::vector<double>& leaf_value) {
    grad_ = &grad;
    hess_ = &hess;
    leaf_value_ = &leaf_value;
    Tree tree;
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n_));
    for (Eigen::Index i = 0; i < n_; ++i) rows[static_cast<std::size_t>(i)] = i;
    grow(tree, rows, 0);
    return tree;
  }

 private:
  double score(double g, double h) const { return g * g / (h + config_.l2_lambda); }

  int grow(Tree& tree, const std::vector<Eigen::Index>& rows, int depth) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    NodeStats total;
    for (auto r : rows) {
      total.grad += (*grad_)[static_cast<std::size_t>(r)];
      total.hess += (*hess_)[static_cast<std::size_t>(r)];
    }
    Split split;
    if (depth < config_.max_depth && rows.size() > 1) split = best_split(rows, total);
    if (split.feature < 0) {
      const double w = -total.grad / (total.hess + config_.l2_lambda);
      tree.nodes[static_cast<std::size_t>(index)].weight = w;
      for (auto r : rows) (*leaf_value_)[static_cast<std::size_t>(r)] = w;
      return index;
    }
    std::vector<Eigen::Index> left;
    std::vector<Eigen::Index> right;
    mark(rows, 1);
    std::vector<char> goes_left(static_cast<std::size_t>(n_), 0);
    // Rows without a stored entry have value 0.
    const bool zero_left = 0.0 < split.threshold;
    for (auto r : rows) goes_left[static_cast<std::size_t>(r)] = zero_left ? 1 : 0;
    for (const auto& e : columns_[static_cast<std::size_t>(split.feature)]) {
      if (in_node_[static_cast<std::size_t>(e.row)]) {
        goes_left[static_cast<std::size_t>(e.row)] = e.value < split.threshold ? 1 : 0;
      }
    }
    mark(rows, 0);
    for (auto r : rows) (goes_left[static_cast<std::size_t>(r)] ? left : right).push_back(r);

    auto& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = l;
    tree.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  void mark(const std::vector<Eigen::Index>& rows, char v) {
    for (auto r : rows) in_node_[static_cast<std::size_t>(r)] = v;
  }

  void consider(int feature, double below, double above, const NodeStats& left,
                const NodeStats& total, Split& best) const {
    const NodeStats right{total.grad - left.grad, total.hess - left.hess};
    if (left.hess < config_.min_child_hessian || right.hess < config_.min_child_hessian) return;
    const double gain = 0.5 * (score(left.grad, left.hess) + score(right.grad, right.hess) -
                               score(total.grad, total.hess));
    if (gain > 0.0 && gain > best.gain) {
      double threshold = below + (above - below) / 2.0;
      if (!(threshold > below)) threshold = above;
      best = {feature, threshold, gain};
    }
  }

  Split best_split(const std::vector<Eigen::Index>& rows, const NodeStats& total) {
    mark(rows, 1);
    Split best;
    std::vector<std::pair<double, NodeStats>> present;  // (value, stats) of stored entries
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      present.clear();
      NodeStats stored;
      for (const auto& e : columns_[j]) {
        if (!in_node_[static_cast<std::size_t>(e.row)]) continue;
        const double g = (*grad_)[static_cast<std::size_t>(e.row)];
        const double h = (*hess_)[static_cast<std::size_t>(e.row)];
        present.push_back({e.value, {g, h}});
        stored.grad += g;
        stored.hess += h;
      }
      if (present.empty()) continue;
      const std::size_t zero_count = rows.size() - present.size();
      const NodeStats zero = zero_count == 0
                                 ? NodeStats{}
                                 : NodeStats{total.grad - stored.grad, total.hess - stored.hess};

      // Sweep the distinct values in ascending order with the zero bucket merged in.
      NodeStats left;
      bool have_prev = false;
      double prev = 0.0;
      bool zero_done = zero_count == 0;
      auto step = [&](double value, const NodeStats& s) {
        if (have_prev && value != prev) consider(static_cast<int>(j), prev, value, left, total, best);
        left.grad += s.grad;
        left.hess += s.hess;
        prev = value;
        have_prev = true;
      };
      for (const auto& [value, s] : present) {
        if (!zero_done && value > 0.0) {
          step(0.0, zero);
          zero_done = true;
        }
        step(value, s);
      }
      if (!zero_done) step(0.0, zero);
    }
    mark(rows, 0);
    return best;
  }

  const TrainConfig& config_;
  Eigen::Index n_;
  std::vector<std::vector<ColumnEntry>> columns_;
  std::vector<char> in_node_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<double>* leaf_value_ = nullptr;
};

double weighted_logloss(const Eigen::VectorXd& logit, const Eigen::VectorXd& y,
                        const std::vector<double>& weight) {
  double loss = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double w = weight[static_cast<std::size_t>(i)];
    loss += w * logloss_at(logit(i), y(i));
    total += w;
  }
  return loss / total;
}

}  // namespace

double Tree::predict(const FeatureVector& fv) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(fv.value_at(static_cast<std::size_t>(n.feature)) < n.threshold
                                     ? n.left
                                     : n.right);
  }
  return nodes[i].weight;
}

double Tree::predict_row(const SparseRows& x, Eigen::Index row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    const double v = n.feature < x.cols() ? x.coeff(row, n.feature) : 0.0;
    i = static_cast<std::size_t>(v < n.threshold ? n.left : n.right);
  }
  return nodes[i].weight;
}

int Tree::depth() const {
  std::function<int(int)> rec = [&](int i) -> int {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes.empty() ? 0 : rec(0);
}

bool Tree::well_formed() const {
  if (nodes.empty()) return false;
  std::vector<int> seen(nodes.size(), 0);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    if (i < 0 || static_cast<std::size_t>(i) >= nodes.size()) return false;
    if (seen[static_cast<std::size_t>(i)]++) return false;
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      if (!std::isfinite(n.weight)) return false;
      continue;
    }
    if (!std::isfinite(n.threshold)) return false;
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

double predict_gbdt(const GbdtModel& model, const FeatureVector& fv) {
  double z = model.base_logit;
  for (const auto& t : model.trees) z += model.learning_rate * t.predict(fv);
  return sigmoid(z);
}

Eigen::VectorXd predict_gbdt(const GbdtModel& model, const SparseRows& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double z = model.base_logit;
    for (const auto& t : model.trees) z += model.learning_rate * t.predict_row(x, i);
    out(i) = sigmoid(z);
  }
  return out;
}

double resolve_positive_weight(const Dataset& data, const TrainConfig& config) {
  if (config.positive_weight) return *config.positive_weight;
  const auto pos = static_cast<double>(data.positives());
  const auto neg = static_cast<double>(data.negatives());
  if (pos == 0.0) return 1.0;
  return std::min(neg / pos, kMaxPositiveWeight);
}

GbdtFit train_gbdt(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.rows() == 0) throw TrainingError("cannot train on an empty dataset");
  if (data.positives() == 0 || data.negatives() == 0) {
    throw TrainingError("training data must contain both secret and non-secret examples");
  }
  GbdtFit fit;
  fit.positive_weight = resolve_positive_weight(data, config);
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<double> weight(n);
  double pos_mass = 0.0;
  double total_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = data.y(static_cast<Eigen::Index>(i)) > 0.5;
    weight[i] = pos ? fit.positive_weight : 1.0;
    pos_mass += pos ? weight[i] : 0.0;
    total_mass += weight[i];
  }
  const double prior = pos_mass / total_mass;

  auto& model = fit.model;
  model.learning_rate = config.learning_rate;
  model.base_logit = std::log(prior / (1.0 - prior));
  model.n_features = static_cast<std::size_t>(data.features());

  Eigen::VectorXd logit = Eigen::VectorXd::Constant(data.rows(), model.base_logit);
  fit.loss_history.push_back(weighted_logloss(logit, data.y, weight));

  TreeBuilder builder(data, config);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  std::vector<double> leaf(n);
  for (int t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ei = static_cast<Eigen::Index>(i);
      const double p = sigmoid(logit(ei));
      grad[i] = weight[i] * (p - data.y(ei));
      hess[i] = weight[i] * p * (1.0 - p);
    }
    model.trees.push_back(builder.build(grad, hess, leaf));
    for (std::size_t i = 0; i < n; ++i) {
      logit(static_cast<Eigen::Index>(i)) += model.learning_rate * leaf[i];
    }
    fit.loss_history.push_back(weighted_logloss(logit, data.y, weight));
  }
  return fit;
}

}  // namespace secretsweep
