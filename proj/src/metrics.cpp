#include "crowdteach/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdteach {

double rmse(const LinearModel& a, const LinearModel& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("rmse: dimension mismatch");
  }
  const double ms = (a.weights() - b.weights()).squaredNorm() /
                    static_cast<double>(a.dim());
  return std::sqrt(ms);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) {
    throw std::invalid_argument("percentile: empty input");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("percentile: q must be in [0, 1]");
  }
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::string band_name(Band b) {
  switch (b) {
    case Band::low: return "low";
    case Band::middle: return "middle";
    case Band::high: return "high";
  }
  return "?";
}

AbilityBands stratify(const std::map<std::int64_t, double>& initial_aucs) {
  if (initial_aucs.size() < 4) {
    throw std::invalid_argument("stratify: need at least 4 students");
  }
  std::vector<double> values;
  values.reserve(initial_aucs.size());
  for (const auto& [id, auc] : initial_aucs) values.push_back(auc);

  AbilityBands bands;
  bands.low_cut = percentile(values, 0.25);
  bands.high_cut = percentile(values, 0.75);
  for (const auto& [id, auc] : initial_aucs) {
    Band b = Band::middle;
    if (auc < bands.low_cut) b = Band::low;
    else if (auc > bands.high_cut) b = Band::high;
    bands.assignment.emplace(id, b);
  }
  return bands;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
};

}  // namespace

std::vector<TrajectoryRow> aggregate(
    const std::vector<const RunMetrics*>& runs,
    const std::map<std::tuple<double, std::uint64_t, int>, Band>* bands) {
  if (runs.empty()) return {};

  std::size_t grid = 0;
  bool grid_set = false;
  for (const RunMetrics* run : runs) {
    for (const std::vector<double>& series : run->auc) {
      if (!grid_set) {
        grid = series.size();
        grid_set = true;
      } else if (series.size() != grid) {
        throw std::invalid_argument("aggregate: runs have mismatched iteration grids");
      }
    }
  }

  // (policy, lambda, band) -> per-iteration accumulators
  std::map<std::tuple<std::string, double, std::string>, std::vector<Accumulator>> cells;
  const auto accumulate = [&](const std::string& policy, double lambda,
                              const std::string& band, const std::vector<double>& series) {
    auto& acc = cells[{policy, lambda, band}];
    if (acc.empty()) acc.resize(grid);
    for (std::size_t t = 0; t < grid; ++t) acc[t].add(series[t]);
  };

  for (const RunMetrics* run : runs) {
    for (std::size_t s = 0; s < run->student_ids.size(); ++s) {
      const std::vector<double>& series = run->auc[s];
      accumulate(run->policy, run->lambda, "all", series);
      if (bands != nullptr) {
        const auto it = bands->find({run->lambda, run->seed, run->student_ids[s]});
        if (it != bands->end()) {
          accumulate(run->policy, run->lambda, band_name(it->second), series);
        }
      }
    }
  }

  std::vector<TrajectoryRow> rows;
  for (const auto& [key, acc] : cells) {
    const auto& [policy, lambda, band] = key;
    for (std::size_t t = 0; t < acc.size(); ++t) {
      const double n = static_cast<double>(acc[t].n);
      const double mean = acc[t].sum / n;
      const double var = std::max(0.0, acc[t].sum_sq / n - mean * mean);
      rows.push_back(TrajectoryRow{policy, lambda, band, static_cast<int>(t), mean,
                                   std::sqrt(var), acc[t].n});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
    return std::tie(a.policy, a.lambda, a.band, a.iteration) <
           std::tie(b.policy, b.lambda, b.band, b.iteration);
  });
  return rows;
}

}  // namespace crowdteach
