#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "crowdteach/linear_model.hpp"

namespace crowdteach {

struct ExamRecord {
  int iteration = 0;
  double rmse_true = 0.0;           // RMSE(estimated true model, true model)
  double rmse_students_mean = 0.0;  // mean over students of RMSE(estimate, actual)
  bool converged = true;
  double objective = 0.0;
};

struct SelectionRecord {
  int iteration = 0;
  int student_id = 0;
  int example_id = 0;
  int label = 0;
  bool pseudo = false;  // true when the label came from the estimated model
};

/// Full record of one run: per-iteration per-student evaluation AUC (index 0
/// is the pre-teaching state), per-exam estimation quality, and the complete
/// selection log.
struct RunMetrics {
  std::string policy;
  std::string dataset;
  double lambda = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  int exam_interval = 0;
  int exam_size = 0;
  int iterations = 0;
  std::uint64_t seed = 0;

  std::vector<int> student_ids;
  std::vector<std::vector<double>> auc;  // [student][0..iterations]
  std::vector<ExamRecord> exams;
  std::vector<SelectionRecord> selections;
  bool pool_exhausted = false;
  int nonconverged_exams = 0;
};

/// Root-mean-square difference of two weight vectors of equal dimension.
double rmse(const LinearModel& a, const LinearModel& b);

/// q-th percentile (q in [0, 1]) with linear interpolation between order
/// statistics.
double percentile(std::vector<double> values, double q);

enum class Band { low, middle, high };

std::string band_name(Band b);

/// Quartile thresholds over the pooled initial AUCs, with a strict comparison
/// on both cuts: below the 25th percentile is low, above the 75th is high,
/// everything else (including exact ties) is middle.
struct AbilityBands {
  double low_cut = 0.0;
  double high_cut = 0.0;
  std::map<std::int64_t, Band> assignment;
};

AbilityBands stratify(const std::map<std::int64_t, double>& initial_aucs);

struct TrajectoryRow {
  std::string policy;
  double lambda = 0.0;
  std::string band;
  int iteration = 0;
  double mean_auc = 0.0;
  double std_auc = 0.0;
  int n = 0;
};

/// Groups runs by (policy, lambda) and emits, per iteration, the mean and
/// population standard deviation of AUC over students x runs. Always emits
/// band "all"; with a band lookup, also emits one series per non-empty band.
/// The lookup key is (lambda, seed, student id). All runs must share the
/// iteration grid.
std::vector<TrajectoryRow> aggregate(
    const std::vector<const RunMetrics*>& runs,
    const std::map<std::tuple<double, std::uint64_t, int>, Band>* bands = nullptr);

}  // namespace crowdteach
