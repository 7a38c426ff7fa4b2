#include "crowdteach/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "crowdteach/optimize.hpp"
#include "crowdteach/rng.hpp"

namespace crowdteach {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.emplace_back();
  return out;
}

double parse_number(const std::string& field, const std::string& where) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw DataError(where + ": non-numeric field '" + field + "'");
  }
  while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
  if (pos != field.size() || !std::isfinite(v)) {
    throw DataError(where + ": non-numeric field '" + field + "'");
  }
  return v;
}

}  // namespace

int Dataset::count_label(int y) const {
  int n = 0;
  for (const LabeledExample& e : examples) n += (e.y == y) ? 1 : 0;
  return n;
}

Dataset generate_insect(int n_per_class, std::uint64_t seed) {
  if (n_per_class < 1) {
    throw std::invalid_argument("generate_insect: n_per_class must be >= 1");
  }
  const double sd = std::sqrt(0.12);
  const double mean[2][2] = {{-0.10, -0.13}, {0.10, 0.13}};

  RandomStream rng = derive_stream(seed, "insect", {static_cast<std::uint64_t>(n_per_class)});
  Dataset ds;
  ds.name = "insect";
  ds.dim = 2;
  ds.examples.reserve(static_cast<std::size_t>(2 * n_per_class));
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < n_per_class; ++i) {
      Vector x(2);
      x[0] = mean[cls][0] + sd * rng.normal();
      x[1] = mean[cls][1] + sd * rng.normal();
      ds.examples.emplace_back(std::move(x), cls);
    }
  }
  return ds;
}

Dataset load_wine(const std::string& path, int quality_threshold) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("load_wine: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("load_wine: '" + path + "' is empty");
  }
  const std::size_t n_cols = split_fields(line, ';').size();
  if (n_cols != 12) {
    throw DataError("load_wine: header has " + std::to_string(n_cols) +
                    " columns, expected 12");
  }

  Dataset ds;
  ds.name = "wine";
  ds.dim = 11;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> fields = split_fields(line, ';');
    const std::string where = "load_wine: row " + std::to_string(row);
    if (fields.size() != 12) {
      throw DataError(where + ": expected 12 fields, got " + std::to_string(fields.size()));
    }
    Vector x(11);
    for (int c = 0; c < 11; ++c) {
      x[c] = parse_number(fields[static_cast<std::size_t>(c)], where);
    }
    const double quality = parse_number(fields[11], where);
    ds.examples.emplace_back(std::move(x), quality > quality_threshold ? 1 : 0);
  }
  if (ds.examples.empty()) {
    throw DataError("load_wine: '" + path + "' has no data rows");
  }
  return ds;
}

SplitIndices split(const Dataset& dataset, double teaching_fraction, std::uint64_t seed) {
  if (!(teaching_fraction > 0.0 && teaching_fraction < 1.0)) {
    throw std::invalid_argument("split: teaching_fraction must be in (0, 1)");
  }
  const int n = static_cast<int>(dataset.size());
  if (n < 2) {
    throw std::invalid_argument("split: need at least 2 examples");
  }
  int n_teach = static_cast<int>(std::llround(teaching_fraction * n));
  n_teach = std::clamp(n_teach, 1, n - 1);

  // A two-class evaluation part is impossible when it has a single slot or
  // the dataset itself is single-class; in that case the first draw stands.
  const bool two_class_possible =
      (n - n_teach) >= 2 && dataset.count_label(0) > 0 && dataset.count_label(1) > 0;

  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    RandomStream rng = derive_stream(seed, "split", {attempt});
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    shuffle_indices(perm, rng);

    SplitIndices out;
    out.teaching.assign(perm.begin(), perm.begin() + n_teach);
    out.evaluation.assign(perm.begin() + n_teach, perm.end());
    std::sort(out.teaching.begin(), out.teaching.end());
    std::sort(out.evaluation.begin(), out.evaluation.end());

    if (!two_class_possible) return out;
    bool has[2] = {false, false};
    for (int i : out.evaluation) has[dataset.examples[static_cast<std::size_t>(i)].y] = true;
    if (has[0] && has[1]) return out;
  }
  throw DataError("split: evaluation part single-class after 100 attempts");
}

Dataset standardize(const Dataset& dataset, const std::vector<int>& stat_rows) {
  if (stat_rows.empty()) {
    throw std::invalid_argument("standardize: stat_rows is empty");
  }
  const Eigen::Index d = dataset.dim;
  Vector mean = Vector::Zero(d);
  Vector sq = Vector::Zero(d);
  for (int i : stat_rows) {
    const Vector& x = dataset.examples.at(static_cast<std::size_t>(i)).x;
    mean += x;
    sq += x.cwiseProduct(x);
  }
  const double n = static_cast<double>(stat_rows.size());
  mean /= n;
  Vector scale(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double var = std::max(0.0, sq[c] / n - mean[c] * mean[c]);
    const double sd = std::sqrt(var);
    scale[c] = sd > 1e-12 ? 1.0 / sd : 1.0;
  }

  Dataset out;
  out.name = dataset.name;
  out.dim = d;
  out.examples.reserve(dataset.size());
  for (const LabeledExample& e : dataset.examples) {
    out.examples.emplace_back(((e.x - mean).cwiseProduct(scale)).eval(), e.y);
  }
  return out;
}

Dataset augment_bias(const Dataset& dataset) {
  Dataset out;
  out.name = dataset.name;
  out.dim = dataset.dim + 1;
  out.examples.reserve(dataset.size());
  for (const LabeledExample& e : dataset.examples) {
    Vector x(out.dim);
    x.head(dataset.dim) = e.x;
    x[dataset.dim] = 1.0;
    out.examples.emplace_back(std::move(x), e.y);
  }
  return out;
}

FitResult fit_true_model(const Dataset& dataset) {
  if (dataset.count_label(0) == 0 || dataset.count_label(1) == 0) {
    throw std::invalid_argument("fit_true_model: dataset must contain both classes");
  }
  const Eigen::Index d = dataset.dim;
  const auto objective = [&dataset, d](const Vector& w, Vector& grad) {
    double value = 0.0;
    grad.setZero();
    for (const LabeledExample& e : dataset.examples) {
      const double z = w.dot(e.x);
      value += softplus(z) - static_cast<double>(e.y) * z;
      grad += (sigmoid(z) - static_cast<double>(e.y)) * e.x;
    }
    return value;
  };

  MinimizeOptions opts;
  opts.gradient_tolerance = 1e-6;
  opts.max_iterations = 10000;
  MinimizeResult res = minimize(objective, Vector::Zero(d), opts);
  return FitResult{LinearModel(std::move(res.x)), res.converged, res.iterations};
}

}  // namespace crowdteach
