#pragma once

#include <map>
#include <utility>
#include <vector>

#include "crowdteach/linear_model.hpp"

namespace crowdteach {

/// Sparse binary answers from one exam round: entry (i, j, y) is student j's
/// answer to item i. Every referenced item must appear in items; (i, j) pairs
/// are unique.
struct AnswerMatrix {
  struct Entry {
    int item;
    int student;
    int answer;
  };
  std::vector<std::pair<int, Vector>> items;  // (item index, features)
  std::vector<Entry> entries;
};

struct Hyperparameters {
  double eta = 1.0;     // prior precision of the true model
  double lambda = 1.0;  // precision of student noise around the true model
};

struct EstimationResult {
  LinearModel true_model;
  std::map<int, LinearModel> student_models;
  double objective_value = 0.0;
  bool converged = false;
  int iterations_used = 0;
};

/// Negative log-posterior of (true model, student models) given the answers:
///   lambda/2 sum_j ||w_j - w*||^2 + eta/2 ||w*||^2
///   - sum_ij [y log s_ij + (1-y) log(1-s_ij)],  s_ij = sigma(<w_j, x_i>).
/// All three terms are nonnegative; the estimators minimize F.
double objective_F(const LinearModel& true_model,
                   const std::map<int, LinearModel>& student_models,
                   const AnswerMatrix& answers, const Hyperparameters& hp);

/// Analytic gradient of objective_F:
///   dF/dw* = eta w* - lambda sum_j (w_j - w*)
///   dF/dw_j = lambda (w_j - w*) + sum_i (sigma(<w_j, x_i>) - y_ij) x_i.
std::pair<Vector, std::map<int, Vector>> estimation_gradient(
    const LinearModel& true_model, const std::map<int, LinearModel>& student_models,
    const AnswerMatrix& answers, const Hyperparameters& hp);

/// Joint MAP estimate of the true model and all answering students' models by
/// deterministic minimization of objective_F. Student models start at
/// init_true unless warm-start values are supplied. Non-convergence is
/// reported through the flags, never thrown.
EstimationResult estimate_models(const AnswerMatrix& answers, const Hyperparameters& hp,
                                 const LinearModel& init_true, double tolerance,
                                 int max_iterations,
                                 const std::map<int, LinearModel>* init_students = nullptr);

/// Labels every instance by thresholding the estimated model: 1 when
/// sigma(<w, x>) > 0.5 (strict, so <w, x> = 0 maps to 0). Order preserved.
std::vector<LabeledExample> pseudo_label(
    const LinearModel& true_model_estimate,
    const std::vector<std::pair<int, Vector>>& teaching_instances);

}  // namespace crowdteach
