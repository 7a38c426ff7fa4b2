#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowdteach/crowd_estimation.hpp"
#include "crowdteach/dataset.hpp"
#include "crowdteach/experiment.hpp"
#include "crowdteach/metrics.hpp"
#include "crowdteach/students.hpp"
#include "crowdteach/teaching.hpp"

namespace py = pybind11;
using namespace crowdteach;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Iterative machine teaching simulator: linear students, crowd-based "
            "model estimation and example-selection policies";

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<Vector>(), py::arg("weights"))
      .def_static("zeros", &LinearModel::zeros, py::arg("dim"))
      .def_property_readonly("weights", &LinearModel::weights)
      .def_property_readonly("dim", &LinearModel::dim)
      .def("__repr__", [](const LinearModel& w) {
        return "LinearModel(dim=" + std::to_string(w.dim()) + ")";
      });

  py::class_<LabeledExample>(m, "LabeledExample")
      .def(py::init<Vector, int>(), py::arg("features"), py::arg("label"))
      .def_readonly("x", &LabeledExample::x)
      .def_readonly("y", &LabeledExample::y);

  m.def("sigmoid", py::vectorize(&sigmoid), py::arg("z"));
  m.def("score", &score, py::arg("model"), py::arg("features"));
  m.def("logistic_loss", &logistic_loss, py::arg("model"), py::arg("example"));
  m.def("loss_gradient", &loss_gradient, py::arg("model"), py::arg("example"));
  m.def("sgd_step", &sgd_step, py::arg("model"), py::arg("example"), py::arg("learning_rate"));
  m.def("roc_auc",
        py::overload_cast<const std::vector<double>&, const std::vector<int>&>(&roc_auc),
        py::arg("scores"), py::arg("labels"));
  m.def("roc_auc_model",
        py::overload_cast<const LinearModel&, const std::vector<LabeledExample>&>(&roc_auc),
        py::arg("model"), py::arg("eval_set"));

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("name", &Dataset::name)
      .def_readonly("dim", &Dataset::dim)
      .def("__len__", &Dataset::size)
      .def("count_label", &Dataset::count_label, py::arg("label"))
      .def("features",
           [](const Dataset& ds) {
             Eigen::MatrixXd x(static_cast<Eigen::Index>(ds.size()), ds.dim);
             for (std::size_t i = 0; i < ds.size(); ++i) {
               x.row(static_cast<Eigen::Index>(i)) = ds.examples[i].x.transpose();
             }
             return x;
           })
      .def("labels", [](const Dataset& ds) {
        std::vector<int> y;
        y.reserve(ds.size());
        for (const LabeledExample& e : ds.examples) y.push_back(e.y);
        return y;
      });

  py::class_<SplitIndices>(m, "SplitIndices")
      .def_readonly("teaching", &SplitIndices::teaching)
      .def_readonly("evaluation", &SplitIndices::evaluation);

  m.def("generate_insect", &generate_insect, py::arg("n_per_class"), py::arg("seed"));
  m.def("load_wine", &load_wine, py::arg("path"), py::arg("quality_threshold") = 5);
  m.def("split", &split, py::arg("dataset"), py::arg("teaching_fraction"), py::arg("seed"));
  m.def("standardize", &standardize, py::arg("dataset"), py::arg("stat_rows"));
  m.def("augment_bias", &augment_bias, py::arg("dataset"));

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("iterations", &FitResult::iterations);
  m.def("fit_true_model", &fit_true_model, py::arg("dataset"));

  py::class_<StudentState>(m, "StudentState")
      .def_readonly("id", &StudentState::id)
      .def_readonly("group_id", &StudentState::group_id)
      .def_readonly("model", &StudentState::model)
      .def_readonly("shown", &StudentState::shown);

  py::class_<PopulationSpec>(m, "PopulationSpec")
      .def(py::init([](double lambda, int groups, int students_per_group, std::uint64_t seed) {
             return PopulationSpec{lambda, groups, students_per_group, seed};
           }),
           py::arg("lambda_"), py::arg("groups") = 1, py::arg("students_per_group") = 10,
           py::arg("seed") = 0)
      .def_readwrite("lambda_", &PopulationSpec::lambda)
      .def_readwrite("groups", &PopulationSpec::groups)
      .def_readwrite("students_per_group", &PopulationSpec::students_per_group)
      .def_readwrite("seed", &PopulationSpec::seed);

  m.def("spawn_population", &spawn_population, py::arg("true_model"), py::arg("spec"));
  m.def("present_example", &present_example, py::arg("student"), py::arg("example"),
        py::arg("example_index"), py::arg("learning_rate"));
  m.def("answer_exam", &answer_exam, py::arg("student"), py::arg("exam_items"),
        py::arg("seed"), py::arg("stochastic") = true);

  py::class_<AnswerMatrix>(m, "AnswerMatrix")
      .def(py::init([](std::vector<std::pair<int, Vector>> items,
                       std::vector<std::tuple<int, int, int>> entries) {
             AnswerMatrix am;
             am.items = std::move(items);
             for (const auto& [i, j, y] : entries) {
               am.entries.push_back(AnswerMatrix::Entry{i, j, y});
             }
             return am;
           }),
           py::arg("items"), py::arg("entries"))
      .def_property_readonly("entries", [](const AnswerMatrix& am) {
        std::vector<std::tuple<int, int, int>> out;
        out.reserve(am.entries.size());
        for (const auto& e : am.entries) out.emplace_back(e.item, e.student, e.answer);
        return out;
      });

  py::class_<Hyperparameters>(m, "Hyperparameters")
      .def(py::init([](double eta, double lambda) {
             return Hyperparameters{eta, lambda};
           }),
           py::arg("eta") = 1.0, py::arg("lambda_") = 1.0)
      .def_readwrite("eta", &Hyperparameters::eta)
      .def_readwrite("lambda_", &Hyperparameters::lambda);

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("true_model", &EstimationResult::true_model)
      .def_readonly("student_models", &EstimationResult::student_models)
      .def_readonly("objective_value", &EstimationResult::objective_value)
      .def_readonly("converged", &EstimationResult::converged)
      .def_readonly("iterations_used", &EstimationResult::iterations_used);

  m.def("objective_F", &objective_F, py::arg("true_model"), py::arg("student_models"),
        py::arg("answers"), py::arg("hyperparameters"));
  m.def("estimation_gradient", &estimation_gradient, py::arg("true_model"),
        py::arg("student_models"), py::arg("answers"), py::arg("hyperparameters"));
  m.def(
      "estimate_models",
      [](const AnswerMatrix& answers, const Hyperparameters& hp, const LinearModel& init_true,
         double tolerance, int max_iterations,
         const std::optional<std::map<int, LinearModel>>& init_students) {
        return estimate_models(answers, hp, init_true, tolerance, max_iterations,
                               init_students ? &*init_students : nullptr);
      },
      py::arg("answers"), py::arg("hyperparameters"), py::arg("init_true"),
      py::arg("tolerance") = 1e-6, py::arg("max_iterations") = 5000,
      py::arg("init_students") = py::none());
  m.def("pseudo_label", &pseudo_label, py::arg("true_model_estimate"),
        py::arg("teaching_instances"));

  py::class_<SelectionObjective>(m, "SelectionObjective")
      .def_readonly("example_index", &SelectionObjective::example_index)
      .def_readonly("value", &SelectionObjective::value);

  m.def("selection_value", &selection_value, py::arg("student_model"),
        py::arg("target_model"), py::arg("example"), py::arg("learning_rate"));
  m.def("select_example", &select_example, py::arg("student"), py::arg("target_model"),
        py::arg("teaching_pool"), py::arg("learning_rate"));

  py::class_<TeachingPolicyConfig>(m, "TeachingPolicyConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &TeachingPolicyConfig::alpha)
      .def_readwrite("exam_interval", &TeachingPolicyConfig::exam_interval)
      .def_readwrite("exam_size", &TeachingPolicyConfig::exam_size)
      .def_readwrite("hp", &TeachingPolicyConfig::hp)
      .def_readwrite("estimation_tolerance", &TeachingPolicyConfig::estimation_tolerance)
      .def_readwrite("estimation_max_iterations",
                     &TeachingPolicyConfig::estimation_max_iterations)
      .def_readwrite("stochastic_answers", &TeachingPolicyConfig::stochastic_answers)
      .def_readwrite("simulated_advance", &TeachingPolicyConfig::simulated_advance)
      .def_readwrite("oracle_estimates", &TeachingPolicyConfig::oracle_estimates);

  py::class_<TeachingTask>(m, "TeachingTask")
      .def_readonly("teaching_ids", &TeachingTask::teaching_ids)
      .def_readonly("teaching_labels", &TeachingTask::teaching_labels)
      .def_readonly("exam_ids", &TeachingTask::exam_ids)
      .def_readonly("eval_labels", &TeachingTask::eval_labels);
  m.def("make_task", &make_task, py::arg("dataset"), py::arg("indices"),
        py::arg("disjoint_exam_set") = false);

  py::class_<ExamRecord>(m, "ExamRecord")
      .def_readonly("iteration", &ExamRecord::iteration)
      .def_readonly("rmse_true", &ExamRecord::rmse_true)
      .def_readonly("rmse_students_mean", &ExamRecord::rmse_students_mean)
      .def_readonly("converged", &ExamRecord::converged)
      .def_readonly("objective", &ExamRecord::objective);

  py::class_<SelectionRecord>(m, "SelectionRecord")
      .def_readonly("iteration", &SelectionRecord::iteration)
      .def_readonly("student_id", &SelectionRecord::student_id)
      .def_readonly("example_id", &SelectionRecord::example_id)
      .def_readonly("label", &SelectionRecord::label)
      .def_readonly("pseudo", &SelectionRecord::pseudo);

  py::class_<RunMetrics>(m, "RunMetrics")
      .def_readonly("policy", &RunMetrics::policy)
      .def_readonly("dataset", &RunMetrics::dataset)
      .def_readonly("lambda_", &RunMetrics::lambda)
      .def_readonly("alpha", &RunMetrics::alpha)
      .def_readonly("eta", &RunMetrics::eta)
      .def_readonly("exam_interval", &RunMetrics::exam_interval)
      .def_readonly("exam_size", &RunMetrics::exam_size)
      .def_readonly("iterations", &RunMetrics::iterations)
      .def_readonly("seed", &RunMetrics::seed)
      .def_readonly("student_ids", &RunMetrics::student_ids)
      .def_readonly("auc", &RunMetrics::auc)
      .def_readonly("exams", &RunMetrics::exams)
      .def_readonly("selections", &RunMetrics::selections)
      .def_readonly("pool_exhausted", &RunMetrics::pool_exhausted)
      .def_readonly("nonconverged_exams", &RunMetrics::nonconverged_exams);

  m.def("run_random_teacher", &run_random_teacher, py::arg("students"), py::arg("task"),
        py::arg("iterations"), py::arg("alpha"), py::arg("seed"));
  m.def("run_omniscient_teacher", &run_omniscient_teacher, py::arg("students"),
        py::arg("true_model"), py::arg("task"), py::arg("iterations"), py::arg("alpha"));
  m.def("run_teacherless", &run_teacherless, py::arg("students"), py::arg("task"),
        py::arg("config"), py::arg("iterations"), py::arg("seed"), py::arg("true_model"));

  m.def("rmse", &rmse, py::arg("a"), py::arg("b"));
  m.def("percentile", &percentile, py::arg("values"), py::arg("q"));

  py::enum_<Band>(m, "Band")
      .value("low", Band::low)
      .value("middle", Band::middle)
      .value("high", Band::high);

  py::class_<AbilityBands>(m, "AbilityBands")
      .def_readonly("low_cut", &AbilityBands::low_cut)
      .def_readonly("high_cut", &AbilityBands::high_cut)
      .def_readonly("assignment", &AbilityBands::assignment);
  m.def("stratify", &stratify, py::arg("initial_aucs"));

  m.attr("__version__") = CROWDTEACH_VERSION;
}
