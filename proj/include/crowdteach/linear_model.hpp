#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace crowdteach {

using Vector = Eigen::VectorXd;

/// Numerically stable logistic sigmoid; no overflow for |z| up to ~700.
inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) in overflow-safe form.
inline double softplus(double z) {
  if (z > 0.0) {
    return z + std::log1p(std::exp(-z));
  }
  return std::log1p(std::exp(z));
}

/// Weight vector of a linear binary classifier. The dimension is fixed at
/// construction and all components are validated finite.
class LinearModel {
 public:
  explicit LinearModel(Vector weights);
  static LinearModel zeros(Eigen::Index dim);

  Eigen::Index dim() const { return w_.size(); }
  const Vector& weights() const { return w_; }

 private:
  Vector w_;
};

/// Feature vector plus binary label in {0, 1}.
struct LabeledExample {
  Vector x;
  int y;
  LabeledExample(Vector features, int label);
};

/// sigma(<w, x>), the probability the model assigns to label 1.
double score(const LinearModel& model, const Vector& x);

/// -[y log s + (1-y) log(1-s)] with s = score(model, x), in log-stable form.
double logistic_loss(const LinearModel& model, const LabeledExample& example);

/// (sigma(<w, x>) - y) * x.
Vector loss_gradient(const LinearModel& model, const LabeledExample& example);

/// One gradient step w - lr * loss_gradient(w, example); the input is not
/// mutated. lr = 0 is allowed and returns the weights unchanged.
LinearModel sgd_step(const LinearModel& model, const LabeledExample& example,
                     double learning_rate);

/// Mann-Whitney ROC-AUC: probability that a random positive outscores a
/// random negative, ties counted 1/2. Requires both classes present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);
double roc_auc(const LinearModel& model, const std::vector<LabeledExample>& eval_set);

}  // namespace crowdteach
