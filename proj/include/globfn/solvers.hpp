#pragma once

#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "globfn/objectives.hpp"

namespace globfn {

struct SolverConfig {
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t max_iters = 200'000;
  /// Fraction of the n^2 terms sampled (without replacement) per step.
  double batch_fraction = 0.1;
  std::uint64_t seed = 0;
  double init_std = 1.0;
  /// Objective logging stride; 0 picks max_iters / 100.
  std::size_t log_every = 0;
  /// Stop once relative error to the supplied truth drops below this; 0 disables.
  double early_stop_rel_err = 0.0;

  void validate() const {
    require(learning_rate >= 0.0 && std::isfinite(learning_rate),
            "SolverConfig: learning_rate must be finite and >= 0");
    require(momentum >= 0.0 && momentum < 1.0, "SolverConfig: momentum must lie in [0, 1)");
    require(batch_fraction > 0.0 && batch_fraction <= 1.0,
            "SolverConfig: batch_fraction must lie in (0, 1]");
    require(init_std > 0.0 && std::isfinite(init_std), "SolverConfig: init_std must be > 0");
    require(early_stop_rel_err >= 0.0, "SolverConfig: early_stop_rel_err must be >= 0");
  }

  std::size_t stride() const { return log_every != 0 ? log_every : std::max<std::size_t>(1, max_iters / 100); }
};

struct SolveTrace {
  Vector initial_point;
  Vector final_point;
  std::vector<std::pair<std::size_t, double>> objective_history;
  std::size_t iterations_run = 0;
};

/// min over admissible signs s of ||x - s y|| / ||y||; s in {+1} for odd d,
/// {+1, -1} for even d.
inline double relative_error(std::span<const double> x, std::span<const double> y, int order) {
  require(x.size() == y.size(), "relative_error: dimension mismatch");
  const double ny = norm2(y);
  require(ny > 0.0, "relative_error: y must be nonzero");
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus += (x[i] - y[i]) * (x[i] - y[i]);
    minus += (x[i] + y[i]) * (x[i] + y[i]);
  }
  const double best = order % 2 == 0 ? std::min(plus, minus) : plus;
  return std::sqrt(best) / ny;
}

inline Vector gaussian_point(std::size_t n, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Vector x(n);
  for (double& v : x) v = normal(rng);
  return x;
}

/// Heavy-ball SGD on the dense L1/L2 objective:
///   v <- momentum v - lr g,   x <- x + v,
/// g = mean (sub)gradient over a uniformly sampled batch of (i, j) terms.
inline SolveTrace sgd_momentum(const DenseTarget& target, DenseMode mode,
                               const SolverConfig& config, std::span<const double> truth = {}) {
  config.validate();
  const std::size_t n = target.dim();
  const std::size_t total = target.terms();
  const auto batch = std::min<std::size_t>(
      total, static_cast<std::size_t>(std::ceil(config.batch_fraction * static_cast<double>(total))));
  require(config.early_stop_rel_err == 0.0 || truth.size() == n,
          "sgd_momentum: early stopping needs the ground truth");

  std::mt19937_64 rng(config.seed);
  SolveTrace trace;
  trace.initial_point = gaussian_point(n, config.init_std, rng);
  Vector x = trace.initial_point;
  Vector velocity(n, 0.0), grad(n, 0.0);
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  const std::size_t stride = config.stride();
  if (config.max_iters >= 1) trace.objective_history.emplace_back(0, eval_dense(target, x, mode));

  const double scale = 1.0 / static_cast<double>(batch);
  std::size_t it = 0;
  while (it < config.max_iters) {
    // partial Fisher-Yates: perm[0, batch) becomes a uniform sample
    if (batch < total) {
      for (std::size_t k = 0; k < batch; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, total - 1);
        std::swap(perm[k], perm[pick(rng)]);
      }
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    accumulate_dense_subgrad(target, x, mode, std::span(perm).first(batch), grad);
    for (std::size_t i = 0; i < n; ++i) {
      velocity[i] = config.momentum * velocity[i] - config.learning_rate * scale * grad[i];
      x[i] += velocity[i];
    }
    ++it;
    const bool stop = config.early_stop_rel_err > 0.0 &&
                      relative_error(x, truth, 2) < config.early_stop_rel_err;
    if (it % stride == 0 || it == config.max_iters || stop) {
      trace.objective_history.emplace_back(it, eval_dense(target, x, mode));
    }
    if (stop) break;
  }
  trace.iterations_run = it;
  trace.final_point = std::move(x);
  return trace;
}

/// Full-batch (sub)gradient method x <- x - lr g from a Gaussian start.
template <class Objective, class Subgradient>
SolveTrace subgradient_descent(Objective&& objective, Subgradient&& subgradient, std::size_t dim,
                               const SolverConfig& config) {
  config.validate();
  require(dim >= 1, "subgradient_descent: dimension must be >= 1");
  std::mt19937_64 rng(config.seed);
  SolveTrace trace;
  trace.initial_point = gaussian_point(dim, config.init_std, rng);
  Vector x = trace.initial_point;
  const std::size_t stride = config.stride();
  if (config.max_iters >= 1) {
    trace.objective_history.emplace_back(0, objective(std::span<const double>(x)));
  }
  std::size_t it = 0;
  while (it < config.max_iters) {
    const Vector g = subgradient(std::span<const double>(x));
    for (std::size_t i = 0; i < dim; ++i) x[i] -= config.learning_rate * g[i];
    ++it;
    if (it % stride == 0 || it == config.max_iters) {
      trace.objective_history.emplace_back(it, objective(std::span<const double>(x)));
    }
  }
  trace.iterations_run = it;
  trace.final_point = std::move(x);
  return trace;
}

}  // namespace globfn
