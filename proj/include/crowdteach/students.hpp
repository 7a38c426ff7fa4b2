#pragma once

#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "crowdteach/linear_model.hpp"

namespace crowdteach {

/// One simulated student: current model plus the teaching-set indices already
/// presented to them. State transitions are pure; see present_example.
struct StudentState {
  int id = 0;
  int group_id = 0;
  LinearModel model;
  std::set<int> shown;
};

struct PopulationSpec {
  double lambda = 1.0;  // precision of the Gaussian noise around the true model
  int groups = 1;
  int students_per_group = 10;
  std::uint64_t seed = 0;
};

/// groups x students_per_group students, each initial model drawn
/// independently from N(true_model, lambda^-1 I). Deterministic per seed;
/// draws are keyed per student, so population size changes never reshuffle
/// existing students.
std::vector<StudentState> spawn_population(const LinearModel& true_model,
                                           const PopulationSpec& spec);

/// Applies one SGD update and records the presentation. Presenting an index
/// the student has already seen is an error (each example at most once per
/// student). Returns the successor state; the input is untouched.
StudentState present_example(const StudentState& student, const LabeledExample& example,
                             int example_index, double learning_rate);

/// Exam answers: for each item the student responds 1 with probability
/// sigma(<w, x>), independently per item, deterministic per (seed, student
/// id). With stochastic = false the response is thresholded at 1/2 instead.
std::vector<std::pair<int, int>> answer_exam(
    const StudentState& student, const std::vector<std::pair<int, Vector>>& exam_items,
    std::uint64_t seed, bool stochastic = true);

}  // namespace crowdteach
