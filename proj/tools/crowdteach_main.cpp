#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "crowdteach/experiment.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> entries;
};

// Registers the shared experiment flags; each one maps onto a config key so
// CLI values override the config file.
void add_common_options(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "Config file (flat key = value lines)");
  const auto keyed = [&ov, cmd](const std::string& flag, const std::string& key,
                                const std::string& help) {
    cmd->add_option_function<std::string>(
           flag, [&ov, key](const std::string& v) { ov.entries.emplace_back(key, v); }, help)
        ->type_name("TEXT");
  };
  keyed("--dataset", "dataset", "insect or wine");
  keyed("--wine-path", "wine_path", "Path to the wine quality CSV");
  keyed("--quality-threshold", "wine_quality_threshold", "Wine label threshold (label 1 when quality exceeds it)");
  keyed("--n-per-class", "n_per_class", "Synthetic examples per class");
  keyed("--policy", "policies", "Comma-separated: random,omniscient,teacherless");
  keyed("--lambda", "lambdas", "Comma-separated student-noise precisions");
  keyed("--seeds", "seeds", "Comma-separated run seeds");
  keyed("--iterations", "iterations", "Teaching iterations per run");
  keyed("--alpha", "alpha", "Student learning rate");
  keyed("--eta", "eta", "Prior precision of the true model");
  keyed("--exam-interval", "exam_interval", "Iterations between exams (B)");
  keyed("--exam-size", "exam_size", "Items per exam (T)");
  keyed("--teaching-fraction", "teaching_fraction", "Fraction of examples used for teaching");
  keyed("--groups", "groups", "Student groups per run");
  keyed("--students-per-group", "students_per_group", "Students per group");
  keyed("--master-seed", "master_seed", "Root seed of every random stream");
  keyed("--out", "out_dir", "Output directory");
  keyed("--bias", "bias", "Bias augmentation: auto, on or off");
  keyed("--estimation-lambda", "estimation_lambda", "Lambda used by estimation (0 = population value)");
  keyed("--deterministic-answers", "deterministic_answers", "true/false: threshold exam answers");
  keyed("--frozen-estimates", "frozen_estimates", "true/false: freeze teacher estimates between exams");
  keyed("--per-lambda-stratification", "per_lambda_stratification", "true/false: stratify per lambda");
  keyed("--disjoint-exam-set", "disjoint_exam_set", "true/false: exam set disjoint from teaching pool");
  keyed("--parallelism", "parallelism", "Concurrent runs");
}

crowdteach::ExperimentConfig build_config(const CliOverrides& ov) {
  crowdteach::ExperimentConfig config;
  if (!ov.config_path.empty()) {
    config = crowdteach::load_config_file(ov.config_path);
  }
  for (const auto& [key, value] : ov.entries) {
    crowdteach::apply_config_entry(config, key, value);
  }
  return config;
}

std::vector<int> parse_values(const std::string& raw) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(raw);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw crowdteach::ConfigError("values", "expected an integer, got '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdteach: iterative machine teaching simulator (random, omniscient and teacher-less policies)"};
  app.require_subcommand(1);

  CliOverrides run_ov, sweep_b_ov, sweep_t_ov, dump_ov;
  std::string sweep_b_values, sweep_t_values, dump_out = "dataset.csv";
  std::string dump_seed = "0";

  CLI::App* run_cmd = app.add_subcommand("run", "Run the configured experiment grid");
  add_common_options(run_cmd, run_ov);

  CLI::App* sweep_b_cmd =
      app.add_subcommand("sweep-b", "Teacher-less runs across exam intervals");
  add_common_options(sweep_b_cmd, sweep_b_ov);
  sweep_b_cmd->add_option("--values", sweep_b_values, "Comma-separated exam intervals")
      ->required();

  CLI::App* sweep_t_cmd =
      app.add_subcommand("sweep-t", "Teacher-less runs across exam sizes (B = 1)");
  add_common_options(sweep_t_cmd, sweep_t_ov);
  sweep_t_cmd->add_option("--values", sweep_t_values, "Comma-separated exam sizes")
      ->required();

  CLI::App* dump_cmd =
      app.add_subcommand("dump-dataset", "Write the prepared dataset as CSV (f0..fd, y)");
  add_common_options(dump_cmd, dump_ov);
  dump_cmd->add_option("--seed", dump_seed, "Seed of the prepared dataset");
  dump_cmd->add_option("--file", dump_out, "Destination CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      const auto outcome = crowdteach::run_experiment(build_config(run_ov));
      if (outcome.exit_code != 0) std::cerr << outcome.message << "\n";
      return outcome.exit_code;
    }
    if (sweep_b_cmd->parsed()) {
      const auto outcome = crowdteach::sweep_exam_interval(build_config(sweep_b_ov),
                                                           parse_values(sweep_b_values));
      if (outcome.exit_code != 0) std::cerr << outcome.message << "\n";
      return outcome.exit_code;
    }
    if (sweep_t_cmd->parsed()) {
      const auto outcome = crowdteach::sweep_exam_size(build_config(sweep_t_ov),
                                                       parse_values(sweep_t_values));
      if (outcome.exit_code != 0) std::cerr << outcome.message << "\n";
      return outcome.exit_code;
    }
    if (dump_cmd->parsed()) {
      crowdteach::ExperimentConfig config = build_config(dump_ov);
      crowdteach::validate_config(config);
      const auto seed = static_cast<std::uint64_t>(std::stoll(dump_seed));
      const crowdteach::PreparedData prep = crowdteach::prepare_data(config, seed);
      crowdteach::dump_dataset_csv(prep.data, dump_out);
      return 0;
    }
  } catch (const crowdteach::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const crowdteach::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
