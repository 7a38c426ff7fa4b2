#include "crowdteach/teaching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "crowdteach/rng.hpp"

namespace crowdteach {

namespace {

// Shared by the public op and the run loops so both rank candidates with
// bit-identical arithmetic.
inline double selection_value_impl(const Vector& w, const Vector& w_minus_target,
                                   const Vector& x, int y, double alpha) {
  const double s = sigmoid(w.dot(x)) - static_cast<double>(y);
  const double grad_sq = s * s * x.squaredNorm();
  return alpha * alpha * grad_sq - 2.0 * alpha * s * w_minus_target.dot(x);
}

double eval_auc(const TeachingTask& task, const Vector& w) {
  const Eigen::VectorXd s = task.eval_x * w;
  std::vector<double> scores(s.data(), s.data() + s.size());
  return roc_auc(scores, task.eval_labels);
}

RunMetrics init_metrics(const char* policy, const std::vector<StudentState>& students,
                        const TeachingTask& task, std::uint64_t seed) {
  RunMetrics m;
  m.policy = policy;
  m.seed = seed;
  m.student_ids.reserve(students.size());
  m.auc.resize(students.size());
  for (std::size_t s = 0; s < students.size(); ++s) {
    m.student_ids.push_back(students[s].id);
    m.auc[s].push_back(eval_auc(task, students[s].model.weights()));
  }
  return m;
}

void record_iteration_auc(RunMetrics& m, const std::vector<StudentState>& students,
                          const TeachingTask& task) {
  for (std::size_t s = 0; s < students.size(); ++s) {
    m.auc[s].push_back(eval_auc(task, students[s].model.weights()));
  }
}

// argmin of selection_value over unused pool positions; -1 when exhausted.
int select_position(const Vector& w, const Vector& w_minus_target, const TeachingTask& task,
                    const std::vector<int>& labels, const std::vector<std::uint8_t>& used,
                    double alpha) {
  int best_pos = -1;
  int best_id = std::numeric_limits<int>::max();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t pos = 0; pos < task.teaching_x.size(); ++pos) {
    if (used[pos]) continue;
    const double v = selection_value_impl(w, w_minus_target, task.teaching_x[pos],
                                          labels[pos], alpha);
    const int id = task.teaching_ids[pos];
    if (v < best_value || (v == best_value && id < best_id)) {
      best_value = v;
      best_id = id;
      best_pos = static_cast<int>(pos);
    }
  }
  return best_pos;
}

void validate_run_args(const std::vector<StudentState>& students, const TeachingTask& task,
                       int iterations) {
  if (students.empty()) throw std::invalid_argument("run: no students");
  if (task.teaching_x.empty()) throw std::invalid_argument("run: empty teaching pool");
  if (iterations < 0) throw std::invalid_argument("run: iterations must be >= 0");
}

}  // namespace

TeachingTask make_task(const Dataset& dataset, const SplitIndices& indices,
                       bool disjoint_exam_set) {
  TeachingTask task;
  for (std::size_t k = 0; k < indices.teaching.size(); ++k) {
    const int row = indices.teaching[k];
    const LabeledExample& e = dataset.examples.at(static_cast<std::size_t>(row));
    const bool to_exam = disjoint_exam_set && (k % 2 == 1);
    if (to_exam) {
      task.exam_ids.push_back(row);
      task.exam_x.push_back(e.x);
    } else {
      task.teaching_ids.push_back(row);
      task.teaching_x.push_back(e.x);
      task.teaching_labels.push_back(e.y);
    }
  }
  if (!disjoint_exam_set) {
    task.exam_ids = task.teaching_ids;
    task.exam_x = task.teaching_x;
  }

  task.eval_x.resize(static_cast<Eigen::Index>(indices.evaluation.size()), dataset.dim);
  task.eval_labels.reserve(indices.evaluation.size());
  for (std::size_t k = 0; k < indices.evaluation.size(); ++k) {
    const LabeledExample& e =
        dataset.examples.at(static_cast<std::size_t>(indices.evaluation[k]));
    task.eval_x.row(static_cast<Eigen::Index>(k)) = e.x.transpose();
    task.eval_labels.push_back(e.y);
  }
  return task;
}

double selection_value(const LinearModel& student_model, const LinearModel& target_model,
                       const LabeledExample& example, double learning_rate) {
  if (student_model.dim() != target_model.dim() ||
      student_model.dim() != example.x.size()) {
    throw std::invalid_argument("selection_value: dimension mismatch");
  }
  if (learning_rate < 0.0) {
    throw std::invalid_argument("selection_value: learning_rate must be >= 0");
  }
  const Vector diff = student_model.weights() - target_model.weights();
  return selection_value_impl(student_model.weights(), diff, example.x, example.y,
                              learning_rate);
}

SelectionObjective select_example(const StudentState& student, const LinearModel& target_model,
                                  const std::vector<std::pair<int, LabeledExample>>& teaching_pool,
                                  double learning_rate) {
  if (teaching_pool.empty()) {
    throw TeachingExhausted("student " + std::to_string(student.id) +
                            " has exhausted the teaching pool");
  }
  const Vector diff = student.model.weights() - target_model.weights();
  SelectionObjective best{-1, std::numeric_limits<double>::infinity()};
  for (const auto& [index, example] : teaching_pool) {
    const double v = selection_value_impl(student.model.weights(), diff, example.x,
                                          example.y, learning_rate);
    if (v < best.value || (v == best.value && index < best.example_index)) {
      best = SelectionObjective{index, v};
    }
  }
  return best;
}

RunMetrics run_random_teacher(std::vector<StudentState> students, const TeachingTask& task,
                              int iterations, double alpha, std::uint64_t seed) {
  validate_run_args(students, task, iterations);
  RunMetrics m = init_metrics("random", students, task, seed);

  const std::size_t pool = task.teaching_x.size();
  std::vector<std::vector<int>> unseen(students.size());
  for (auto& u : unseen) {
    u.resize(pool);
    for (std::size_t p = 0; p < pool; ++p) u[p] = static_cast<int>(p);
  }

  int t = 1;
  for (; t <= iterations; ++t) {
    if (unseen[0].empty()) {
      m.pool_exhausted = true;
      break;
    }
    for (std::size_t s = 0; s < students.size(); ++s) {
      RandomStream rng = derive_stream(
          seed, "random_policy",
          {static_cast<std::uint64_t>(students[s].id), static_cast<std::uint64_t>(t)});
      const std::size_t pick = static_cast<std::size_t>(rng.below(unseen[s].size()));
      const int pos = unseen[s][pick];
      unseen[s][pick] = unseen[s].back();
      unseen[s].pop_back();

      const int id = task.teaching_ids[static_cast<std::size_t>(pos)];
      const int label = task.teaching_labels[static_cast<std::size_t>(pos)];
      students[s] = present_example(
          students[s], LabeledExample(task.teaching_x[static_cast<std::size_t>(pos)], label),
          id, alpha);
      m.selections.push_back(SelectionRecord{t, students[s].id, id, label, false});
    }
    record_iteration_auc(m, students, task);
  }
  m.iterations = t - 1;
  return m;
}

RunMetrics run_omniscient_teacher(std::vector<StudentState> students,
                                  const LinearModel& true_model, const TeachingTask& task,
                                  int iterations, double alpha) {
  validate_run_args(students, task, iterations);
  RunMetrics m = init_metrics("omniscient", students, task, 0);

  const std::size_t pool = task.teaching_x.size();
  std::vector<std::vector<std::uint8_t>> used(students.size(),
                                              std::vector<std::uint8_t>(pool, 0));
  std::vector<int> remaining(students.size(), static_cast<int>(pool));

  int t = 1;
  for (; t <= iterations; ++t) {
    if (remaining[0] == 0) {
      m.pool_exhausted = true;
      break;
    }
    for (std::size_t s = 0; s < students.size(); ++s) {
      const Vector diff = students[s].model.weights() - true_model.weights();
      const int pos = select_position(students[s].model.weights(), diff, task,
                                      task.teaching_labels, used[s], alpha);
      used[s][static_cast<std::size_t>(pos)] = 1;
      --remaining[s];

      const int id = task.teaching_ids[static_cast<std::size_t>(pos)];
      const int label = task.teaching_labels[static_cast<std::size_t>(pos)];
      students[s] = present_example(
          students[s], LabeledExample(task.teaching_x[static_cast<std::size_t>(pos)], label),
          id, alpha);
      m.selections.push_back(SelectionRecord{t, students[s].id, id, label, false});
    }
    record_iteration_auc(m, students, task);
  }
  m.iterations = t - 1;
  return m;
}

RunMetrics run_teacherless(std::vector<StudentState> students, const TeachingTask& task,
                           const TeachingPolicyConfig& config, int iterations,
                           std::uint64_t seed, const LinearModel& true_model) {
  validate_run_args(students, task, iterations);
  if (config.exam_interval < 1) {
    throw std::invalid_argument("run_teacherless: exam_interval must be >= 1");
  }
  if (config.exam_size < 1) {
    throw std::invalid_argument("run_teacherless: exam_size must be >= 1");
  }
  RunMetrics m = init_metrics("teacherless", students, task, seed);

  const Eigen::Index d = true_model.dim();
  const std::size_t pool = task.teaching_x.size();

  // group id -> member positions, in student order
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < students.size(); ++s) {
    groups[students[s].group_id].push_back(s);
  }

  // Teacher-side state: per-group estimated true model and pseudo-labels,
  // per-student estimated model.
  std::map<int, Vector> w_star_hat;
  std::map<int, std::vector<int>> pseudo;
  std::vector<Vector> w_hat(students.size());
  const double init_sd = 1.0 / std::sqrt(config.hp.lambda);
  for (const auto& [gid, members] : groups) {
    RandomStream rng = derive_stream(seed, "estimate_init", {static_cast<std::uint64_t>(gid)});
    Vector w(d);
    for (Eigen::Index c = 0; c < d; ++c) w[c] = init_sd * rng.normal();
    for (std::size_t s : members) w_hat[s] = w;
    w_star_hat.emplace(gid, std::move(w));
    pseudo.emplace(gid, std::vector<int>(pool, 0));
  }

  std::vector<std::vector<std::uint8_t>> used(students.size(),
                                              std::vector<std::uint8_t>(pool, 0));
  std::vector<int> remaining(students.size(), static_cast<int>(pool));
  const int exam_count =
      std::min(config.exam_size, static_cast<int>(task.exam_x.size()));

  int t = 1;
  for (; t <= iterations; ++t) {
    if (remaining[0] == 0) {
      m.pool_exhausted = true;
      break;
    }

    if ((t - 1) % config.exam_interval == 0) {
      const std::uint64_t exam_seed = derive_key(seed, "exam", {static_cast<std::uint64_t>(t)});
      ExamRecord record;
      record.iteration = t;
      double objective_sum = 0.0;
      bool all_converged = true;

      for (auto& [gid, members] : groups) {
        RandomStream item_rng = derive_stream(exam_seed, "exam_items",
                                              {static_cast<std::uint64_t>(gid)});
        const std::vector<int> picks = sample_without_replacement(
            static_cast<int>(task.exam_x.size()), exam_count, item_rng);
        std::vector<std::pair<int, Vector>> items;
        items.reserve(picks.size());
        for (int p : picks) {
          items.emplace_back(task.exam_ids[static_cast<std::size_t>(p)],
                             task.exam_x[static_cast<std::size_t>(p)]);
        }

        if (config.oracle_estimates) {
          w_star_hat.at(gid) = true_model.weights();
          for (std::size_t s : members) w_hat[s] = students[s].model.weights();
        } else {
          AnswerMatrix answers;
          answers.items = items;
          for (std::size_t s : members) {
            for (const auto& [item, y] :
                 answer_exam(students[s], items, exam_seed, config.stochastic_answers)) {
              answers.entries.push_back(AnswerMatrix::Entry{item, students[s].id, y});
            }
          }

          std::map<int, LinearModel> warm;
          for (std::size_t s : members) warm.emplace(students[s].id, LinearModel(w_hat[s]));
          const EstimationResult est = estimate_models(
              answers, config.hp, LinearModel(w_star_hat.at(gid)),
              config.estimation_tolerance, config.estimation_max_iterations, &warm);
          w_star_hat.at(gid) = est.true_model.weights();
          for (std::size_t s : members) {
            w_hat[s] = est.student_models.at(students[s].id).weights();
          }
          objective_sum += est.objective_value;
          if (!est.converged) all_converged = false;
        }

        std::vector<int>& labels = pseudo.at(gid);
        const Vector& w = w_star_hat.at(gid);
        for (std::size_t p = 0; p < pool; ++p) {
          labels[p] = w.dot(task.teaching_x[p]) > 0.0 ? 1 : 0;
        }
      }

      double rmse_true_sum = 0.0;
      for (const auto& [gid, w] : w_star_hat) {
        rmse_true_sum += rmse(LinearModel(w), true_model);
      }
      double rmse_students_sum = 0.0;
      for (std::size_t s = 0; s < students.size(); ++s) {
        rmse_students_sum += rmse(LinearModel(w_hat[s]), students[s].model);
      }
      record.rmse_true = rmse_true_sum / static_cast<double>(groups.size());
      record.rmse_students_mean = rmse_students_sum / static_cast<double>(students.size());
      record.converged = all_converged;
      record.objective = objective_sum / static_cast<double>(groups.size());
      if (!all_converged) ++m.nonconverged_exams;
      m.exams.push_back(record);
    }

    for (std::size_t s = 0; s < students.size(); ++s) {
      const int gid = students[s].group_id;
      const std::vector<int>& labels = pseudo.at(gid);
      const Vector diff = w_hat[s] - w_star_hat.at(gid);
      const int pos = select_position(w_hat[s], diff, task, labels, used[s], config.alpha);
      used[s][static_cast<std::size_t>(pos)] = 1;
      --remaining[s];

      const int id = task.teaching_ids[static_cast<std::size_t>(pos)];
      const int label = labels[static_cast<std::size_t>(pos)];
      const Vector& x = task.teaching_x[static_cast<std::size_t>(pos)];
      students[s] = present_example(students[s], LabeledExample(x, label), id, config.alpha);
      m.selections.push_back(SelectionRecord{t, students[s].id, id, label, true});

      if (config.simulated_advance) {
        w_hat[s] -= config.alpha * (sigmoid(w_hat[s].dot(x)) - static_cast<double>(label)) * x;
      }
    }
    record_iteration_auc(m, students, task);
  }
  m.iterations = t - 1;
  return m;
}

}  // namespace crowdteach
