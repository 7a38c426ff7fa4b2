#include "crowdteach/students.hpp"

#include <cmath>
#include <stdexcept>

#include "crowdteach/rng.hpp"

namespace crowdteach {

std::vector<StudentState> spawn_population(const LinearModel& true_model,
                                           const PopulationSpec& spec) {
  if (!(spec.lambda > 0.0)) {
    throw std::invalid_argument("spawn_population: lambda must be > 0");
  }
  if (spec.groups < 1 || spec.students_per_group < 1) {
    throw std::invalid_argument("spawn_population: group sizes must be >= 1");
  }
  const double noise_sd = 1.0 / std::sqrt(spec.lambda);
  const Eigen::Index d = true_model.dim();
  const int total = spec.groups * spec.students_per_group;

  std::vector<StudentState> students;
  students.reserve(static_cast<std::size_t>(total));
  for (int sid = 0; sid < total; ++sid) {
    RandomStream rng = derive_stream(
        spec.seed, "population",
        {double_bits(spec.lambda), static_cast<std::uint64_t>(sid)});
    Vector w(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      w[c] = true_model.weights()[c] + noise_sd * rng.normal();
    }
    students.push_back(StudentState{sid, sid / spec.students_per_group,
                                    LinearModel(std::move(w)), {}});
  }
  return students;
}

StudentState present_example(const StudentState& student, const LabeledExample& example,
                             int example_index, double learning_rate) {
  if (student.shown.count(example_index) != 0) {
    throw std::invalid_argument("present_example: example " +
                                std::to_string(example_index) +
                                " was already shown to student " +
                                std::to_string(student.id));
  }
  StudentState next = student;
  next.model = sgd_step(student.model, example, learning_rate);
  next.shown.insert(example_index);
  return next;
}

std::vector<std::pair<int, int>> answer_exam(
    const StudentState& student, const std::vector<std::pair<int, Vector>>& exam_items,
    std::uint64_t seed, bool stochastic) {
  RandomStream rng =
      derive_stream(seed, "exam_answers", {static_cast<std::uint64_t>(student.id)});
  std::vector<std::pair<int, int>> answers;
  answers.reserve(exam_items.size());
  for (const auto& [index, x] : exam_items) {
    const double p = score(student.model, x);
    const bool one = stochastic ? rng.bernoulli(p) : p > 0.5;
    answers.emplace_back(index, one ? 1 : 0);
  }
  return answers;
}

}  // namespace crowdteach
