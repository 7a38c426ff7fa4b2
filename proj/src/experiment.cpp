#include "crowdteach/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "crowdteach/rng.hpp"

namespace fs = std::filesystem;

namespace crowdteach {

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw ConfigError(key, "expected a boolean, got '" + value + "'");
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t dataset_fingerprint(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(h, ds.name.data(), ds.name.size());
  const std::int64_t dim = ds.dim;
  h = fnv1a(h, &dim, sizeof(dim));
  for (const LabeledExample& e : ds.examples) {
    h = fnv1a(h, e.x.data(), sizeof(double) * static_cast<std::size_t>(e.x.size()));
    h = fnv1a(h, &e.y, sizeof(e.y));
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{
      {"dataset", c.dataset},
      {"wine_path", c.wine_path},
      {"wine_quality_threshold", c.wine_quality_threshold},
      {"n_per_class", c.n_per_class},
      {"policies", c.policies},
      {"lambdas", c.lambdas},
      {"seeds", c.seeds},
      {"iterations", c.iterations},
      {"alpha", c.alpha},
      {"eta", c.eta},
      {"exam_interval", c.exam_interval},
      {"exam_size", c.exam_size},
      {"teaching_fraction", c.teaching_fraction},
      {"groups", c.groups},
      {"students_per_group", c.students_per_group},
      {"master_seed", c.master_seed},
      {"out_dir", c.out_dir},
      {"bias", c.bias},
      {"estimation_lambda", c.estimation_lambda},
      {"deterministic_answers", c.deterministic_answers},
      {"frozen_estimates", c.frozen_estimates},
      {"per_lambda_stratification", c.per_lambda_stratification},
      {"disjoint_exam_set", c.disjoint_exam_set},
      {"parallelism", c.parallelism},
  };
}

struct PlanItem {
  std::string policy;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int exam_interval = 1;
  int exam_size = 100;
  std::string file;  // relative to out_dir
};

std::string run_file_name(const PlanItem& item, const std::string& tag) {
  std::string name = "runs/" + item.policy;
  if (!tag.empty()) name += "_" + tag;
  name += "_lambda" + fmt_short(item.lambda) + "_seed" + std::to_string(item.seed) + ".json";
  return name;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out << content;
  }
  fs::rename(tmp, path);
}

void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "dataset") {
    c.dataset = value;
  } else if (key == "wine_path") {
    c.wine_path = value;
  } else if (key == "wine_quality_threshold") {
    c.wine_quality_threshold = static_cast<int>(parse_int(key, value));
  } else if (key == "n_per_class") {
    c.n_per_class = static_cast<int>(parse_int(key, value));
  } else if (key == "policies") {
    c.policies = split_list(value);
  } else if (key == "lambdas") {
    c.lambdas.clear();
    for (const std::string& v : split_list(value)) c.lambdas.push_back(parse_double(key, v));
  } else if (key == "seeds") {
    c.seeds.clear();
    for (const std::string& v : split_list(value)) {
      c.seeds.push_back(static_cast<std::uint64_t>(parse_int(key, v)));
    }
  } else if (key == "iterations") {
    c.iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
  } else if (key == "eta") {
    c.eta = parse_double(key, value);
  } else if (key == "exam_interval") {
    c.exam_interval = static_cast<int>(parse_int(key, value));
  } else if (key == "exam_size") {
    c.exam_size = static_cast<int>(parse_int(key, value));
  } else if (key == "teaching_fraction") {
    c.teaching_fraction = parse_double(key, value);
  } else if (key == "groups") {
    c.groups = static_cast<int>(parse_int(key, value));
  } else if (key == "students_per_group") {
    c.students_per_group = static_cast<int>(parse_int(key, value));
  } else if (key == "master_seed") {
    c.master_seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "out_dir" || key == "out") {
    c.out_dir = value;
  } else if (key == "bias") {
    c.bias = value;
  } else if (key == "estimation_lambda") {
    c.estimation_lambda = parse_double(key, value);
  } else if (key == "deterministic_answers") {
    c.deterministic_answers = parse_bool(key, value);
  } else if (key == "frozen_estimates") {
    c.frozen_estimates = parse_bool(key, value);
  } else if (key == "per_lambda_stratification") {
    c.per_lambda_stratification = parse_bool(key, value);
  } else if (key == "disjoint_exam_set") {
    c.disjoint_exam_set = parse_bool(key, value);
  } else if (key == "parallelism") {
    c.parallelism = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  ExperimentConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected key = value");
    }
    apply_config_entry(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.dataset != "insect" && c.dataset != "wine") {
    throw ConfigError("dataset", "must be 'insect' or 'wine', got '" + c.dataset + "'");
  }
  if (c.policies.empty()) throw ConfigError("policies", "must not be empty");
  for (const std::string& p : c.policies) {
    if (p != "random" && p != "omniscient" && p != "teacherless") {
      throw ConfigError("policies", "unknown policy '" + p + "'");
    }
  }
  if (c.lambdas.empty()) throw ConfigError("lambdas", "must not be empty");
  for (double l : c.lambdas) {
    if (!(l > 0.0)) throw ConfigError("lambdas", "values must be > 0");
  }
  if (c.seeds.empty()) throw ConfigError("seeds", "must not be empty");
  if (c.iterations < 0) throw ConfigError("iterations", "must be >= 0");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
  if (!(c.eta > 0.0)) throw ConfigError("eta", "must be > 0");
  if (c.exam_interval < 1) throw ConfigError("exam_interval", "must be >= 1");
  if (c.exam_size < 1) throw ConfigError("exam_size", "must be >= 1");
  if (!(c.teaching_fraction > 0.0 && c.teaching_fraction < 1.0)) {
    throw ConfigError("teaching_fraction", "must be in (0, 1)");
  }
  if (c.n_per_class < 1) throw ConfigError("n_per_class", "must be >= 1");
  if (c.groups < 1) throw ConfigError("groups", "must be >= 1");
  if (c.students_per_group < 1) throw ConfigError("students_per_group", "must be >= 1");
  if (c.bias != "auto" && c.bias != "on" && c.bias != "off") {
    throw ConfigError("bias", "must be auto, on or off");
  }
  if (c.estimation_lambda < 0.0) throw ConfigError("estimation_lambda", "must be >= 0");
  if (c.parallelism < 1) throw ConfigError("parallelism", "must be >= 1");
}

std::string config_hash(const ExperimentConfig& c, const std::string& command,
                        const std::vector<int>& sweep_values) {
  nlohmann::json j = config_to_json(c);
  j["command"] = command;
  j["sweep_values"] = sweep_values;
  const std::string s = j.dump();
  return hex64(fnv1a(1469598103934665603ull, s.data(), s.size()));
}

PreparedData prepare_data(const ExperimentConfig& c, std::uint64_t seed) {
  Dataset raw = c.dataset == "insect"
                    ? generate_insect(c.n_per_class, derive_key(c.master_seed, "dataset", {seed}))
                    : load_wine(c.wine_path, c.wine_quality_threshold);
  SplitIndices indices = split(raw, c.teaching_fraction, derive_key(c.master_seed, "split", {seed}));

  Dataset prepared = std::move(raw);
  if (c.dataset == "wine") {
    prepared = standardize(prepared, indices.teaching);
  }
  const bool bias_on = c.bias == "on" || (c.bias == "auto" && c.dataset == "wine");
  if (bias_on) prepared = augment_bias(prepared);

  FitResult fit = fit_true_model(prepared);
  TeachingTask task = make_task(prepared, indices, c.disjoint_exam_set);

  const Eigen::VectorXd s = task.eval_x * fit.model.weights();
  std::vector<double> scores(s.data(), s.data() + s.size());
  const double auc = roc_auc(scores, task.eval_labels);

  PreparedData out{std::move(prepared), std::move(indices), std::move(task),
                   std::move(fit.model), fit.converged, auc, 0};
  out.fingerprint = dataset_fingerprint(out.data);
  return out;
}

RunMetrics run_policy(const ExperimentConfig& c, const std::string& policy, double lambda,
                      std::uint64_t seed, const PreparedData& prepared) {
  PopulationSpec spec{lambda, c.groups, c.students_per_group,
                      derive_key(c.master_seed, "population", {double_bits(lambda), seed})};
  std::vector<StudentState> students = spawn_population(prepared.w_star, spec);
  const std::uint64_t run_key = derive_key(c.master_seed, "run", {double_bits(lambda), seed});

  RunMetrics m;
  if (policy == "random") {
    m = run_random_teacher(std::move(students), prepared.task, c.iterations, c.alpha, run_key);
  } else if (policy == "omniscient") {
    m = run_omniscient_teacher(std::move(students), prepared.w_star, prepared.task,
                               c.iterations, c.alpha);
  } else if (policy == "teacherless") {
    TeachingPolicyConfig tc;
    tc.alpha = c.alpha;
    tc.exam_interval = c.exam_interval;
    tc.exam_size = c.exam_size;
    tc.hp = Hyperparameters{c.eta, c.estimation_lambda > 0.0 ? c.estimation_lambda : lambda};
    tc.stochastic_answers = !c.deterministic_answers;
    tc.simulated_advance = !c.frozen_estimates;
    m = run_teacherless(std::move(students), prepared.task, tc, c.iterations, run_key,
                        prepared.w_star);
  } else {
    throw ConfigError("policies", "unknown policy '" + policy + "'");
  }
  m.dataset = prepared.data.name;
  m.lambda = lambda;
  m.alpha = c.alpha;
  m.eta = c.eta;
  m.exam_interval = c.exam_interval;
  m.exam_size = c.exam_size;
  m.seed = seed;
  return m;
}

nlohmann::json run_metrics_to_json(const RunMetrics& m) {
  nlohmann::json exams = nlohmann::json::array();
  for (const ExamRecord& e : m.exams) {
    exams.push_back({e.iteration, e.rmse_true, e.rmse_students_mean,
                     e.converged ? 1 : 0, e.objective});
  }
  nlohmann::json selections = nlohmann::json::array();
  for (const SelectionRecord& s : m.selections) {
    selections.push_back({s.iteration, s.student_id, s.example_id, s.label,
                          s.pseudo ? 1 : 0});
  }
  return nlohmann::json{
      {"policy", m.policy},
      {"dataset", m.dataset},
      {"lambda", m.lambda},
      {"alpha", m.alpha},
      {"eta", m.eta},
      {"exam_interval", m.exam_interval},
      {"exam_size", m.exam_size},
      {"iterations", m.iterations},
      {"seed", m.seed},
      {"student_ids", m.student_ids},
      {"auc", m.auc},
      {"exams", exams},
      {"selections", selections},
      {"pool_exhausted", m.pool_exhausted},
      {"nonconverged_exams", m.nonconverged_exams},
  };
}

RunMetrics run_metrics_from_json(const nlohmann::json& j) {
  RunMetrics m;
  m.policy = j.at("policy").get<std::string>();
  m.dataset = j.at("dataset").get<std::string>();
  m.lambda = j.at("lambda").get<double>();
  m.alpha = j.at("alpha").get<double>();
  m.eta = j.at("eta").get<double>();
  m.exam_interval = j.at("exam_interval").get<int>();
  m.exam_size = j.at("exam_size").get<int>();
  m.iterations = j.at("iterations").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.student_ids = j.at("student_ids").get<std::vector<int>>();
  m.auc = j.at("auc").get<std::vector<std::vector<double>>>();
  for (const auto& e : j.at("exams")) {
    m.exams.push_back(ExamRecord{e.at(0).get<int>(), e.at(1).get<double>(),
                                 e.at(2).get<double>(), e.at(3).get<int>() != 0,
                                 e.at(4).get<double>()});
  }
  for (const auto& s : j.at("selections")) {
    m.selections.push_back(SelectionRecord{s.at(0).get<int>(), s.at(1).get<int>(),
                                           s.at(2).get<int>(), s.at(3).get<int>(),
                                           s.at(4).get<int>() != 0});
  }
  m.pool_exhausted = j.at("pool_exhausted").get<bool>();
  m.nonconverged_exams = j.at("nonconverged_exams").get<int>();
  return m;
}

nlohmann::json estimation_result_to_json(const EstimationResult& result) {
  nlohmann::json students = nlohmann::json::object();
  for (const auto& [id, model] : result.student_models) {
    students[std::to_string(id)] =
        std::vector<double>(model.weights().data(),
                            model.weights().data() + model.weights().size());
  }
  return nlohmann::json{
      {"true_model", std::vector<double>(result.true_model.weights().data(),
                                         result.true_model.weights().data() +
                                             result.true_model.weights().size())},
      {"student_models", std::move(students)},
      {"objective_value", result.objective_value},
      {"converged", result.converged},
      {"iterations_used", result.iterations_used},
  };
}

void dump_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ostringstream out;
  for (Eigen::Index c = 0; c < ds.dim; ++c) out << "f" << c << ",";
  out << "y\n";
  for (const LabeledExample& e : ds.examples) {
    for (Eigen::Index c = 0; c < ds.dim; ++c) out << fmt_g(e.x[c]) << ",";
    out << e.y << "\n";
  }
  write_file_atomic(path, out.str());
}

namespace {

// Shared backend for run_experiment and the two sweeps.
struct Execution {
  const ExperimentConfig& config;
  std::string command;
  std::vector<int> sweep_values;
  std::vector<PlanItem> items;

  ExperimentOutcome run() {
    validate_config(config);
    const std::string hash = config_hash(config, command, sweep_values);
    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir / "runs");

    nlohmann::json manifest;
    std::set<std::string> done;
    const fs::path manifest_path = out_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
      try {
        std::ifstream in(manifest_path);
        nlohmann::json prev = nlohmann::json::parse(in);
        if (prev.value("config_hash", "") == hash) {
          manifest = std::move(prev);
          for (const auto& r : manifest["runs"]) {
            if (r.value("status", "") == "done" &&
                fs::exists(out_dir / r.value("file", ""))) {
              done.insert(r.value("file", ""));
            }
          }
        }
      } catch (const std::exception&) {
        // unreadable manifest: start fresh
      }
    }
    if (manifest.is_null()) {
      manifest = nlohmann::json::object();
      manifest["datasets"] = nlohmann::json::object();
    }
    manifest["tool"] = "crowdteach";
    manifest["version"] = CROWDTEACH_VERSION;
    manifest["command"] = command;
    manifest["config_hash"] = hash;
    manifest["config"] = config_to_json(config);
    if (!sweep_values.empty()) manifest["sweep_values"] = sweep_values;
    manifest["fp_env"] = {{"compiler", __VERSION__},
                          {"sizeof_double", sizeof(double)},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                        std::to_string(EIGEN_MINOR_VERSION)}};

    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (done.count(items[i].file) == 0) pending.push_back(i);
    }

    // Prepare every seed needed by a pending item (deterministic, shared).
    std::map<std::uint64_t, PreparedData> prepared;
    std::set<std::uint64_t> needed;
    for (std::size_t i : pending) needed.insert(items[i].seed);
    for (std::uint64_t seed : needed) {
      prepared.emplace(seed, prepare_data(config, seed));
    }
    for (const auto& [seed, prep] : prepared) {
      manifest["datasets"][std::to_string(seed)] = {
          {"fingerprint", hex64(prep.fingerprint)},
          {"w_star_auc", prep.w_star_auc},
          {"fit_converged", prep.fit_converged}};
    }

    // Manifest skeleton for this plan, in plan order.
    nlohmann::json runs = nlohmann::json::array();
    std::map<std::string, std::size_t> run_slot;
    for (const PlanItem& item : items) {
      run_slot[item.file] = runs.size();
      runs.push_back({{"policy", item.policy},
                      {"lambda", item.lambda},
                      {"seed", item.seed},
                      {"exam_interval", item.exam_interval},
                      {"exam_size", item.exam_size},
                      {"file", item.file},
                      {"status", done.count(item.file) ? "done" : "pending"}});
    }
    manifest["runs"] = std::move(runs);

    std::mutex mu;
    const auto save_manifest = [&]() {
      write_file_atomic((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
    };
    save_manifest();

    std::atomic<std::size_t> cursor{0};
    std::atomic<int> failures{0};
    const int workers = std::max(1, std::min<int>(config.parallelism,
                                                  static_cast<int>(pending.size())));
    const auto worker = [&]() {
      for (;;) {
        const std::size_t k = cursor.fetch_add(1);
        if (k >= pending.size()) return;
        const PlanItem& item = items[pending[k]];
        ExperimentConfig local = config;
        local.exam_interval = item.exam_interval;
        local.exam_size = item.exam_size;
        try {
          const RunMetrics m =
              run_policy(local, item.policy, item.lambda, item.seed, prepared.at(item.seed));
          write_file_atomic((out_dir / item.file).string(),
                            run_metrics_to_json(m).dump() + "\n");
          std::lock_guard<std::mutex> lock(mu);
          manifest["runs"][run_slot[item.file]]["status"] = "done";
          save_manifest();
        } catch (const std::exception& e) {
          failures.fetch_add(1);
          std::lock_guard<std::mutex> lock(mu);
          manifest["runs"][run_slot[item.file]]["status"] = "failed";
          manifest["runs"][run_slot[item.file]]["error"] = e.what();
          save_manifest();
        }
      }
    };
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> threads;
      threads.reserve(static_cast<std::size_t>(workers));
      for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
      for (std::thread& th : threads) th.join();
    }

    // Aggregation reads every completed run back from disk so resumed and
    // uninterrupted executions produce identical bytes.
    std::vector<RunMetrics> loaded;
    for (const PlanItem& item : items) {
      const fs::path file = out_dir / item.file;
      if (!fs::exists(file)) continue;
      std::ifstream in(file);
      loaded.push_back(run_metrics_from_json(nlohmann::json::parse(in)));
    }
    write_aggregates(out_dir, loaded);

    manifest["aggregates"] = aggregate_names;
    save_manifest();

    if (failures.load() > 0) {
      return ExperimentOutcome{3, std::to_string(failures.load()) +
                                      " run(s) failed; see manifest.json"};
    }
    return ExperimentOutcome{0, "ok"};
  }

  // ---- aggregation ----

  std::vector<std::string> aggregate_names;

  void write_aggregates(const fs::path& out_dir, const std::vector<RunMetrics>& loaded) {
    // Initial abilities per (lambda, seed, student): identical across
    // policies, so take the first run seen for each population.
    std::map<std::tuple<double, std::uint64_t, int>, double> initial;
    for (const RunMetrics& m : loaded) {
      for (std::size_t s = 0; s < m.student_ids.size(); ++s) {
        initial.emplace(std::make_tuple(m.lambda, m.seed, m.student_ids[s]), m.auc[s][0]);
      }
    }

    std::map<std::tuple<double, std::uint64_t, int>, Band> bands;
    if (initial.size() >= 4) {
      if (config.per_lambda_stratification) {
        std::map<double, std::map<std::int64_t, double>> pools;
        std::map<double, std::vector<std::tuple<double, std::uint64_t, int>>> keys;
        for (const auto& [key, auc] : initial) {
          auto& pool = pools[std::get<0>(key)];
          auto& ks = keys[std::get<0>(key)];
          pool.emplace(static_cast<std::int64_t>(ks.size()), auc);
          ks.push_back(key);
        }
        for (const auto& [lambda, pool] : pools) {
          if (pool.size() < 4) continue;
          const AbilityBands ab = stratify(pool);
          for (const auto& [local_id, band] : ab.assignment) {
            bands.emplace(keys[lambda][static_cast<std::size_t>(local_id)], band);
          }
        }
      } else {
        std::map<std::int64_t, double> pool;
        std::vector<std::tuple<double, std::uint64_t, int>> keys;
        for (const auto& [key, auc] : initial) {
          pool.emplace(static_cast<std::int64_t>(keys.size()), auc);
          keys.push_back(key);
        }
        const AbilityBands ab = stratify(pool);
        for (const auto& [local_id, band] : ab.assignment) {
          bands.emplace(keys[static_cast<std::size_t>(local_id)], band);
        }
      }
    }
    const auto* bands_ptr = bands.empty() ? nullptr : &bands;

    aggregate_names.clear();
    if (command == "sweep-b") {
      for (int b : sweep_values) {
        std::vector<const RunMetrics*> subset;
        for (const RunMetrics& m : loaded) {
          if (m.exam_interval == b) subset.push_back(&m);
        }
        const std::string name = "trajectory_B" + std::to_string(b) + ".csv";
        write_trajectory_csv(out_dir / name, aggregate(subset, bands_ptr));
        aggregate_names.push_back(name);
      }
    } else if (command == "run") {
      std::vector<const RunMetrics*> all;
      for (const RunMetrics& m : loaded) all.push_back(&m);
      write_trajectory_csv(out_dir / "trajectory.csv", aggregate(all, bands_ptr));
      aggregate_names.push_back("trajectory.csv");
    }

    std::ostringstream rmse_csv;
    rmse_csv << "policy,lambda,T,B,iteration,rmse_true,rmse_students_mean,seed\n";
    for (const RunMetrics& m : loaded) {
      for (const ExamRecord& e : m.exams) {
        rmse_csv << m.policy << "," << fmt_g(m.lambda) << "," << m.exam_size << ","
                 << m.exam_interval << "," << e.iteration << "," << fmt_g(e.rmse_true)
                 << "," << fmt_g(e.rmse_students_mean) << "," << m.seed << "\n";
      }
    }
    write_file_atomic((out_dir / "rmse.csv").string(), rmse_csv.str());
    aggregate_names.push_back("rmse.csv");
  }

  static void write_trajectory_csv(const fs::path& path,
                                   const std::vector<TrajectoryRow>& rows) {
    std::ostringstream out;
    out << "policy,lambda,band,iteration,mean_auc,std_auc,n\n";
    for (const TrajectoryRow& r : rows) {
      out << r.policy << "," << fmt_g(r.lambda) << "," << r.band << "," << r.iteration
          << "," << fmt_g(r.mean_auc) << "," << fmt_g(r.std_auc) << "," << r.n << "\n";
    }
    write_file_atomic(path.string(), out.str());
  }
};

std::vector<int> dedup_values(const char* field, std::vector<int> values) {
  if (values.empty()) throw ConfigError(field, "sweep values must not be empty");
  std::vector<int> out;
  for (int v : values) {
    if (v < 1) throw ConfigError(field, "sweep values must be >= 1");
    if (std::find(out.begin(), out.end(), v) != out.end()) {
      std::cerr << "warning: duplicate sweep value " << v << " ignored\n";
      continue;
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  Execution exec{config, "run", {}, {}};
  for (const std::string& policy : config.policies) {
    for (double lambda : config.lambdas) {
      for (std::uint64_t seed : config.seeds) {
        PlanItem item{policy, lambda, seed, config.exam_interval, config.exam_size, ""};
        item.file = run_file_name(item, "");
        exec.items.push_back(std::move(item));
      }
    }
  }
  return exec.run();
}

ExperimentOutcome sweep_exam_interval(const ExperimentConfig& config, std::vector<int> values) {
  validate_config(config);
  if (std::find(config.policies.begin(), config.policies.end(), "teacherless") ==
      config.policies.end()) {
    throw ConfigError("policies", "sweep-b requires the teacherless policy");
  }
  values = dedup_values("exam_interval", std::move(values));
  Execution exec{config, "sweep-b", values, {}};
  for (int b : values) {
    for (double lambda : config.lambdas) {
      for (std::uint64_t seed : config.seeds) {
        PlanItem item{"teacherless", lambda, seed, b, config.exam_size, ""};
        item.file = run_file_name(item, "B" + std::to_string(b));
        exec.items.push_back(std::move(item));
      }
    }
  }
  return exec.run();
}

ExperimentOutcome sweep_exam_size(const ExperimentConfig& config, std::vector<int> values) {
  validate_config(config);
  if (std::find(config.policies.begin(), config.policies.end(), "teacherless") ==
      config.policies.end()) {
    throw ConfigError("policies", "sweep-t requires the teacherless policy");
  }
  values = dedup_values("exam_size", std::move(values));

  // The exam pool size is split-dependent but identical across seeds.
  const PreparedData probe = prepare_data(config, config.seeds.front());
  const int exam_pool = static_cast<int>(probe.task.exam_x.size());
  for (int t : values) {
    if (t > exam_pool) {
      throw ConfigError("exam_size", "T = " + std::to_string(t) +
                                         " exceeds the exam set size " +
                                         std::to_string(exam_pool));
    }
  }

  Execution exec{config, "sweep-t", values, {}};
  for (int t : values) {
    for (double lambda : config.lambdas) {
      for (std::uint64_t seed : config.seeds) {
        PlanItem item{"teacherless", lambda, seed, 1, t, ""};
        item.file = run_file_name(item, "T" + std::to_string(t));
        exec.items.push_back(std::move(item));
      }
    }
  }
  return exec.run();
}

}  // namespace crowdteach
