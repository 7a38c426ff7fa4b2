#include "crowdteach/linear_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace crowdteach {

namespace {

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite component");
  }
}

void require_same_dim(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

}  // namespace

LinearModel::LinearModel(Vector weights) : w_(std::move(weights)) {
  require_finite(w_, "LinearModel");
}

LinearModel LinearModel::zeros(Eigen::Index dim) {
  return LinearModel(Vector::Zero(dim));
}

LabeledExample::LabeledExample(Vector features, int label)
    : x(std::move(features)), y(label) {
  require_finite(x, "LabeledExample");
  if (y != 0 && y != 1) {
    throw std::invalid_argument("label must be 0 or 1, got " + std::to_string(y));
  }
}

double score(const LinearModel& model, const Vector& x) {
  require_same_dim(model.dim(), x.size());
  return sigmoid(model.weights().dot(x));
}

double logistic_loss(const LinearModel& model, const LabeledExample& example) {
  require_same_dim(model.dim(), example.x.size());
  const double z = model.weights().dot(example.x);
  // softplus(z) - y*z == -[y log s + (1-y) log(1-s)]
  return softplus(z) - static_cast<double>(example.y) * z;
}

Vector loss_gradient(const LinearModel& model, const LabeledExample& example) {
  require_same_dim(model.dim(), example.x.size());
  const double s = sigmoid(model.weights().dot(example.x));
  return (s - static_cast<double>(example.y)) * example.x;
}

LinearModel sgd_step(const LinearModel& model, const LabeledExample& example,
                     double learning_rate) {
  if (learning_rate < 0.0) {
    throw std::invalid_argument("learning_rate must be >= 0");
  }
  Vector next = model.weights() - learning_rate * loss_gradient(model, example);
  return LinearModel(std::move(next));
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("roc_auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    }
    n_pos += static_cast<std::size_t>(y);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc: evaluation set must contain both classes");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank-sum with average ranks inside tie groups.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double roc_auc(const LinearModel& model, const std::vector<LabeledExample>& eval_set) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(eval_set.size());
  labels.reserve(eval_set.size());
  for (const LabeledExample& e : eval_set) {
    scores.push_back(score(model, e.x));
    labels.push_back(e.y);
  }
  return roc_auc(scores, labels);
}

}  // namespace crowdteach
