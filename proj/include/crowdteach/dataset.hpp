#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdteach/linear_model.hpp"

namespace crowdteach {

/// Input or file-level problem (missing file, malformed row, impossible split).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Immutable collection of labeled examples sharing one feature dimension.
struct Dataset {
  std::string name;
  Eigen::Index dim = 0;
  std::vector<LabeledExample> examples;

  std::size_t size() const { return examples.size(); }
  int count_label(int y) const;
};

/// Disjoint teaching/evaluation index views over one Dataset.
struct SplitIndices {
  std::vector<int> teaching;
  std::vector<int> evaluation;
};

/// Two-class synthetic set: 2-D Gaussians with means (-0.10, -0.13) for class 0
/// and (0.10, 0.13) for class 1, per-coordinate variance 0.12. Yields
/// 2*n_per_class examples, class 0 first; deterministic per seed.
Dataset generate_insect(int n_per_class, std::uint64_t seed);

/// Reads the red wine quality CSV (semicolon-delimited, quoted header,
/// 11 feature columns + integer quality). Label is 1 when quality exceeds the
/// threshold. Features are returned raw; see standardize().
Dataset load_wine(const std::string& path, int quality_threshold);

/// Uniform random split without replacement. The evaluation part must end up
/// with both classes; the draw is retried up to 100 times before failing.
SplitIndices split(const Dataset& dataset, double teaching_fraction, std::uint64_t seed);

/// Per-feature zero-mean unit-variance scaling with statistics computed over
/// stat_rows only (typically the teaching split). Constant features pass
/// through centred.
Dataset standardize(const Dataset& dataset, const std::vector<int>& stat_rows);

/// Appends a constant 1 feature so downstream models carry an intercept.
Dataset augment_bias(const Dataset& dataset);

struct FitResult {
  LinearModel model;
  bool converged = false;
  int iterations = 0;
};

/// Minimizer of the total logistic loss over all examples, from the zero
/// vector, to gradient norm 1e-6 or 10000 iterations. Non-convergence returns
/// the best iterate with converged = false.
FitResult fit_true_model(const Dataset& dataset);

}  // namespace crowdteach
