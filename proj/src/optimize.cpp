#include "crowdteach/optimize.hpp"

#include <deque>

namespace crowdteach {

namespace {

struct Correction {
  Vector s;
  Vector y;
  double rho;
};

// Two-loop recursion; returns the descent direction -H*g.
Vector lbfgs_direction(const Vector& grad, const std::deque<Correction>& hist) {
  Vector q = grad;
  std::vector<double> alpha(hist.size());
  for (std::size_t i = hist.size(); i-- > 0;) {
    alpha[i] = hist[i].rho * hist[i].s.dot(q);
    q -= alpha[i] * hist[i].y;
  }
  double gamma = 1.0;
  if (!hist.empty()) {
    const Correction& last = hist.back();
    gamma = last.s.dot(last.y) / last.y.squaredNorm();
  }
  Vector r = gamma * q;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const double beta = hist[i].rho * hist[i].y.dot(r);
    r += (alpha[i] - beta) * hist[i].s;
  }
  return -r;
}

}  // namespace

MinimizeResult minimize(const ValueGradientFn& fn, Vector x0,
                        const MinimizeOptions& options) {
  constexpr double kArmijo = 1e-4;

  MinimizeResult result;
  Vector x = std::move(x0);
  Vector grad(x.size());
  double value = fn(x, grad);
  double grad_norm = grad.norm();

  std::deque<Correction> hist;
  Vector trial(x.size());
  Vector trial_grad(x.size());

  // Once objective decrements sink below the floating-point resolution of the
  // value, steps are judged by gradient progress instead.
  double best_grad_norm = grad_norm;
  int no_progress = 0;

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (grad_norm <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    Vector dir = lbfgs_direction(grad, hist);
    double slope = dir.dot(grad);
    if (!(slope < 0.0)) {
      hist.clear();
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    const double value_noise = 1e-12 * (1.0 + std::abs(value));
    double step = hist.empty() ? std::min(1.0, 1.0 / grad_norm) : 1.0;
    bool accepted = false;
    double trial_value = value;
    double trial_norm = grad_norm;
    while (step > 1e-20) {
      trial = x + step * dir;
      trial_value = fn(trial, trial_grad);
      if (std::isfinite(trial_value)) {
        trial_norm = trial_grad.norm();
        const bool sufficient = trial_value <= value + kArmijo * step * slope;
        const bool gradient_progress =
            trial_value <= value + value_noise && trial_norm < grad_norm;
        if (sufficient || gradient_progress) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      break;  // no measurable progress in either value or gradient
    }

    Vector s = step * dir;
    Vector y = trial_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      hist.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(hist.size()) > options.history) hist.pop_front();
    }

    x.swap(trial);
    grad.swap(trial_grad);
    value = trial_value;
    grad_norm = trial_norm;

    if (grad_norm < 0.99 * best_grad_norm) {
      best_grad_norm = grad_norm;
      no_progress = 0;
    } else if (++no_progress >= 25) {
      break;  // gradient norm flatlined well above the tolerance
    }
  }

  if (!result.converged) {
    result.converged = grad_norm <= options.gradient_tolerance;
  }
  result.x = std::move(x);
  result.value = value;
  result.gradient_norm = grad_norm;
  result.iterations = iter;
  return result;
}

}  // namespace crowdteach
