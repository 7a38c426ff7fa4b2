#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdteach/dataset.hpp"
#include "crowdteach/metrics.hpp"
#include "crowdteach/teaching.hpp"

namespace crowdteach {

/// Invalid configuration; carries the offending field name.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(std::string field_name, const std::string& message)
      : std::runtime_error("config error: field '" + field_name + "': " + message),
        field(std::move(field_name)) {}
};

struct ExperimentConfig {
  std::string dataset = "insect";  // insect | wine
  std::string wine_path = "data/winequality-red.csv";
  int wine_quality_threshold = 5;
  int n_per_class = 1000;
  std::vector<std::string> policies = {"random", "omniscient", "teacherless"};
  std::vector<double> lambdas = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int iterations = 500;
  double alpha = 0.01;
  double eta = 1.0;
  int exam_interval = 1;  // B
  int exam_size = 100;    // T
  double teaching_fraction = 0.75;
  int groups = 1;
  int students_per_group = 10;
  std::uint64_t master_seed = 7;
  std::string out_dir = "out";
  std::string bias = "auto";       // auto (wine on, insect off) | on | off
  double estimation_lambda = 0.0;  // 0: estimation uses the population lambda
  bool deterministic_answers = false;
  bool frozen_estimates = false;
  bool per_lambda_stratification = false;
  bool disjoint_exam_set = false;
  int parallelism = 1;
};

/// Reads a flat key = value file ('#' starts a comment). Unknown keys are
/// rejected with the key as the field name.
ExperimentConfig load_config_file(const std::string& path);

/// Applies one key/value pair (the config-file grammar; also used for CLI
/// overrides). Throws ConfigError on unknown keys or unparseable values.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

void validate_config(const ExperimentConfig& config);

std::string config_hash(const ExperimentConfig& config, const std::string& command,
                        const std::vector<int>& sweep_values);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok, 3 partial failure (details in the manifest)
  std::string message;
};

/// Runs every (policy, lambda, seed) combination, writing one JSON file per
/// run plus trajectory.csv, rmse.csv and manifest.json under out_dir.
/// Completed runs recorded in a matching manifest are not re-run.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Teacher-less runs at each exam interval in values (shared seeds), one
/// aggregate trajectory CSV per value plus a combined rmse.csv.
ExperimentOutcome sweep_exam_interval(const ExperimentConfig& config, std::vector<int> values);

/// Teacher-less runs at each exam size in values with the exam interval
/// fixed at 1; estimation-error series land in rmse.csv keyed by T.
ExperimentOutcome sweep_exam_size(const ExperimentConfig& config, std::vector<int> values);

/// Everything derived from one seed: the prepared dataset (standardized /
/// bias-augmented as configured), its split, the task views, and the fitted
/// true model.
struct PreparedData {
  Dataset data;
  SplitIndices indices;
  TeachingTask task;
  LinearModel w_star;
  bool fit_converged = false;
  double w_star_auc = 0.0;
  std::uint64_t fingerprint = 0;
};

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);

/// One run of one policy on prepared data; metadata fully filled in.
RunMetrics run_policy(const ExperimentConfig& config, const std::string& policy,
                      double lambda, std::uint64_t seed, const PreparedData& prepared);

nlohmann::json run_metrics_to_json(const RunMetrics& metrics);
RunMetrics run_metrics_from_json(const nlohmann::json& j);

/// Debug dump of a MAP estimation result: weight arrays, objective value and
/// convergence metadata.
nlohmann::json estimation_result_to_json(const EstimationResult& result);

/// CSV dump of a dataset: columns f0..f{d-1}, y.
void dump_dataset_csv(const Dataset& dataset, const std::string& path);

/// Writes content to path via a temp file + rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace crowdteach
