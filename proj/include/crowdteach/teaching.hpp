#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "crowdteach/crowd_estimation.hpp"
#include "crowdteach/dataset.hpp"
#include "crowdteach/metrics.hpp"
#include "crowdteach/students.hpp"

namespace crowdteach {

/// Raised when a student has been shown every example in the pool.
struct TeachingExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SelectionObjective {
  int example_index = -1;
  double value = 0.0;
};

struct TeachingPolicyConfig {
  double alpha = 0.01;
  int exam_interval = 1;  // B: iterations between exams
  int exam_size = 100;    // T: items per exam
  Hyperparameters hp;
  double estimation_tolerance = 1e-6;
  int estimation_max_iterations = 5000;
  bool stochastic_answers = true;  // false: answers thresholded at 1/2
  bool simulated_advance = true;   // false: teacher-side estimates frozen between exams
  bool oracle_estimates = false;   // diagnostic: bypass estimation, use actual models
};

/// Instance pools and evaluation data for one run. By default the exam set is
/// the teaching instance set; in disjoint mode the teaching split is carved
/// in two (even positions teach, odd positions are examined).
struct TeachingTask {
  std::vector<int> teaching_ids;     // dataset row ids, ascending
  std::vector<Vector> teaching_x;
  std::vector<int> teaching_labels;  // true labels
  std::vector<int> exam_ids;
  std::vector<Vector> exam_x;
  Eigen::MatrixXd eval_x;            // evaluation split, one row per example
  std::vector<int> eval_labels;
};

TeachingTask make_task(const Dataset& dataset, const SplitIndices& indices,
                       bool disjoint_exam_set = false);

/// Change in squared distance to the target caused by one step on the given
/// example: alpha^2 ||g||^2 - 2 alpha <w - w_target, g> with
/// g = loss_gradient(student, example). Negative values move the student
/// closer to the target.
double selection_value(const LinearModel& student_model, const LinearModel& target_model,
                       const LabeledExample& example, double learning_rate);

/// Pool element minimizing selection_value; ties broken by lowest index. The
/// pool must exclude examples the student has seen; an empty pool throws
/// TeachingExhausted.
SelectionObjective select_example(const StudentState& student, const LinearModel& target_model,
                                  const std::vector<std::pair<int, LabeledExample>>& teaching_pool,
                                  double learning_rate);

/// Each iteration every student receives a uniformly random not-yet-shown
/// example with its true label.
RunMetrics run_random_teacher(std::vector<StudentState> students, const TeachingTask& task,
                              int iterations, double alpha, std::uint64_t seed);

/// Each iteration every student receives the example minimizing
/// selection_value against the true model and the student's actual current
/// model, with its true label. Deterministic.
RunMetrics run_omniscient_teacher(std::vector<StudentState> students,
                                  const LinearModel& true_model, const TeachingTask& task,
                                  int iterations, double alpha);

/// Teacher-less loop: every exam_interval iterations all students answer a
/// fresh random exam, the true and student models are re-estimated from the
/// answers, and the teaching pool is re-labeled by the estimated true model;
/// every iteration each student receives the pool element minimizing
/// selection_value against the estimates, with its pseudo-label. true_model
/// is used only to record estimation error.
RunMetrics run_teacherless(std::vector<StudentState> students, const TeachingTask& task,
                           const TeachingPolicyConfig& config, int iterations,
                           std::uint64_t seed, const LinearModel& true_model);

}  // namespace crowdteach
