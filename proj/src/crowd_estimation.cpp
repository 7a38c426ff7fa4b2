#include "crowdteach/crowd_estimation.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "crowdteach/optimize.hpp"

namespace crowdteach {

namespace {

struct DenseProblem {
  Eigen::Index dim = 0;
  std::vector<int> student_ids;                   // sorted
  std::vector<Vector> item_x;                     // by position
  std::vector<std::array<int, 3>> entries;        // (item pos, student pos, y)
  double eta = 1.0;
  double lambda = 1.0;

  Eigen::Index joint_size() const {
    return dim * static_cast<Eigen::Index>(1 + student_ids.size());
  }
};

DenseProblem build_problem(const AnswerMatrix& answers, const Hyperparameters& hp,
                           Eigen::Index dim) {
  if (!(hp.eta > 0.0) || !(hp.lambda > 0.0)) {
    throw std::invalid_argument("estimate_models: eta and lambda must be > 0");
  }
  if (answers.entries.empty()) {
    throw std::invalid_argument("estimate_models: answers are empty");
  }

  DenseProblem p;
  p.dim = dim;
  p.eta = hp.eta;
  p.lambda = hp.lambda;

  std::unordered_map<int, int> item_pos;
  item_pos.reserve(answers.items.size());
  for (const auto& [index, x] : answers.items) {
    if (x.size() != dim) {
      throw std::invalid_argument("estimate_models: item dimension mismatch");
    }
    if (!item_pos.emplace(index, static_cast<int>(p.item_x.size())).second) {
      throw std::invalid_argument("estimate_models: duplicate item index " +
                                  std::to_string(index));
    }
    p.item_x.push_back(x);
  }

  std::unordered_set<std::uint64_t> seen_pairs;
  seen_pairs.reserve(answers.entries.size());
  for (const AnswerMatrix::Entry& e : answers.entries) {
    const auto it = item_pos.find(e.item);
    if (it == item_pos.end()) {
      throw std::invalid_argument("answer references unknown item " + std::to_string(e.item));
    }
    if (e.answer != 0 && e.answer != 1) {
      throw std::invalid_argument("answers must be 0 or 1");
    }
    const std::uint64_t pair_key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.item)) << 32) |
        static_cast<std::uint32_t>(e.student);
    if (!seen_pairs.insert(pair_key).second) {
      throw std::invalid_argument("duplicate (item, student) answer: (" +
                                  std::to_string(e.item) + ", " +
                                  std::to_string(e.student) + ")");
    }
    p.student_ids.push_back(e.student);
  }
  std::sort(p.student_ids.begin(), p.student_ids.end());
  p.student_ids.erase(std::unique(p.student_ids.begin(), p.student_ids.end()),
                      p.student_ids.end());

  std::unordered_map<int, int> student_pos;
  student_pos.reserve(p.student_ids.size());
  for (int j = 0; j < static_cast<int>(p.student_ids.size()); ++j) {
    student_pos.emplace(p.student_ids[static_cast<std::size_t>(j)], j);
  }
  p.entries.reserve(answers.entries.size());
  for (const AnswerMatrix::Entry& e : answers.entries) {
    p.entries.push_back({item_pos.at(e.item), student_pos.at(e.student), e.answer});
  }
  return p;
}

// F and its gradient over the packed joint vector [w*; w_0; w_1; ...].
double joint_value_gradient(const DenseProblem& p, const Vector& z, Vector& grad) {
  const Eigen::Index d = p.dim;
  const auto w_star = z.segment(0, d);
  grad.setZero();
  auto g_star = grad.segment(0, d);

  double value = 0.5 * p.eta * w_star.squaredNorm();
  g_star += p.eta * w_star;

  for (std::size_t j = 0; j < p.student_ids.size(); ++j) {
    const Eigen::Index off = d * static_cast<Eigen::Index>(1 + j);
    const auto w_j = z.segment(off, d);
    const Vector diff = w_j - w_star;
    value += 0.5 * p.lambda * diff.squaredNorm();
    grad.segment(off, d) += p.lambda * diff;
    g_star -= p.lambda * diff;
  }

  for (const auto& [item, student, y] : p.entries) {
    const Eigen::Index off = d * static_cast<Eigen::Index>(1 + student);
    const Vector& x = p.item_x[static_cast<std::size_t>(item)];
    const double zz = z.segment(off, d).dot(x);
    value += softplus(zz) - static_cast<double>(y) * zz;
    grad.segment(off, d) += (sigmoid(zz) - static_cast<double>(y)) * x;
  }
  return value;
}

const LinearModel& model_for(const std::map<int, LinearModel>& models, int student) {
  const auto it = models.find(student);
  if (it == models.end()) {
    throw std::invalid_argument("no model for student " + std::to_string(student));
  }
  return it->second;
}

}  // namespace

double objective_F(const LinearModel& true_model,
                   const std::map<int, LinearModel>& student_models,
                   const AnswerMatrix& answers, const Hyperparameters& hp) {
  double value = 0.5 * hp.eta * true_model.weights().squaredNorm();
  for (const auto& [id, model] : student_models) {
    if (model.dim() != true_model.dim()) {
      throw std::invalid_argument("objective_F: student model dimension mismatch");
    }
    value += 0.5 * hp.lambda * (model.weights() - true_model.weights()).squaredNorm();
  }

  std::unordered_map<int, const Vector*> item_x;
  item_x.reserve(answers.items.size());
  for (const auto& [index, x] : answers.items) item_x.emplace(index, &x);

  for (const AnswerMatrix::Entry& e : answers.entries) {
    const auto it = item_x.find(e.item);
    if (it == item_x.end()) {
      throw std::invalid_argument("objective_F: answer references unknown item " +
                                  std::to_string(e.item));
    }
    const LinearModel& w_j = model_for(student_models, e.student);
    const double z = w_j.weights().dot(*it->second);
    value += softplus(z) - static_cast<double>(e.answer) * z;
  }
  return value;
}

std::pair<Vector, std::map<int, Vector>> estimation_gradient(
    const LinearModel& true_model, const std::map<int, LinearModel>& student_models,
    const AnswerMatrix& answers, const Hyperparameters& hp) {
  Vector g_star = hp.eta * true_model.weights();
  std::map<int, Vector> g_students;
  for (const auto& [id, model] : student_models) {
    const Vector diff = model.weights() - true_model.weights();
    g_star -= hp.lambda * diff;
    g_students.emplace(id, hp.lambda * diff);
  }

  std::unordered_map<int, const Vector*> item_x;
  item_x.reserve(answers.items.size());
  for (const auto& [index, x] : answers.items) item_x.emplace(index, &x);

  for (const AnswerMatrix::Entry& e : answers.entries) {
    const auto it = item_x.find(e.item);
    if (it == item_x.end()) {
      throw std::invalid_argument("estimation_gradient: answer references unknown item " +
                                  std::to_string(e.item));
    }
    const LinearModel& w_j = model_for(student_models, e.student);
    const double z = w_j.weights().dot(*it->second);
    g_students.at(e.student) += (sigmoid(z) - static_cast<double>(e.answer)) * (*it->second);
  }
  return {std::move(g_star), std::move(g_students)};
}

EstimationResult estimate_models(const AnswerMatrix& answers, const Hyperparameters& hp,
                                 const LinearModel& init_true, double tolerance,
                                 int max_iterations,
                                 const std::map<int, LinearModel>* init_students) {
  const Eigen::Index d = init_true.dim();
  const DenseProblem p = build_problem(answers, hp, d);

  Vector z0(p.joint_size());
  z0.segment(0, d) = init_true.weights();
  for (std::size_t j = 0; j < p.student_ids.size(); ++j) {
    const Eigen::Index off = d * static_cast<Eigen::Index>(1 + j);
    const int id = p.student_ids[j];
    if (init_students != nullptr) {
      const auto it = init_students->find(id);
      if (it != init_students->end()) {
        if (it->second.dim() != d) {
          throw std::invalid_argument("estimate_models: warm-start dimension mismatch");
        }
        z0.segment(off, d) = it->second.weights();
        continue;
      }
    }
    z0.segment(off, d) = init_true.weights();
  }

  MinimizeOptions opts;
  opts.gradient_tolerance = tolerance;
  opts.max_iterations = max_iterations;
  const MinimizeResult res = minimize(
      [&p](const Vector& z, Vector& grad) { return joint_value_gradient(p, z, grad); },
      std::move(z0), opts);

  EstimationResult out{LinearModel(res.x.segment(0, d)), {}, 0.0, res.converged,
                       res.iterations};
  for (std::size_t j = 0; j < p.student_ids.size(); ++j) {
    const Eigen::Index off = d * static_cast<Eigen::Index>(1 + j);
    out.student_models.emplace(p.student_ids[j], LinearModel(res.x.segment(off, d)));
  }
  out.objective_value = objective_F(out.true_model, out.student_models, answers, hp);
  return out;
}

std::vector<LabeledExample> pseudo_label(
    const LinearModel& true_model_estimate,
    const std::vector<std::pair<int, Vector>>& teaching_instances) {
  std::vector<LabeledExample> out;
  out.reserve(teaching_instances.size());
  for (const auto& [index, x] : teaching_instances) {
    if (x.size() != true_model_estimate.dim()) {
      throw std::invalid_argument("pseudo_label: dimension mismatch");
    }
    // sigma(<w, x>) > 1/2 exactly when <w, x> > 0
    out.emplace_back(x, true_model_estimate.weights().dot(x) > 0.0 ? 1 : 0);
  }
  return out;
}

}  // namespace crowdteach
