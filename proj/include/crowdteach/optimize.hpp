#pragma once

#include <functional>

#include "crowdteach/linear_model.hpp"

namespace crowdteach {

struct MinimizeOptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 5000;
  int history = 10;
};

struct MinimizeResult {
  Vector x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Evaluates the objective at x and fills grad; returns the value.
using ValueGradientFn = std::function<double(const Vector& x, Vector& grad)>;

/// Deterministic limited-memory quasi-Newton descent with backtracking line
/// search (sufficient-decrease condition). Stops when the gradient norm drops
/// to the tolerance or the iteration cap is hit; the best iterate is returned
/// either way.
MinimizeResult minimize(const ValueGradientFn& fn, Vector x0,
                        const MinimizeOptions& options = {});

}  // namespace crowdteach
