#pragma once

// Clarke first-order stationarity of f_1. Coordinate i is stationary when
//
//   0 in sum over (d-1)-tuples t of X(t) * sign(X(t) x_i - Y(t) y_i)
//
// with sign(0) = [-1, 1]. Dividing through by y_i turns each coordinate's
// condition into a root of one shared nondecreasing step function of
// t = x_i / y_i (the staircase), whose jumps sit at Y(t) / X(t).

#include <random>
#include <utility>
#include <vector>

#include "globfn/objectives.hpp"

namespace globfn {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v, double tol = 0.0) const { return lo - tol <= v && v <= hi + tol; }
};

inline constexpr double kStationarityTolerance = 1e-9;
// A residual is treated as an exact zero (a kink) below this relative size.
inline constexpr double kKinkRelativeTolerance = 1e-12;

inline Interval clarke_interval(const TensorProblem& prob, std::span<const double> x,
                                std::size_t i) {
  prob.check_point(x);
  require(i < prob.dim(), "clarke_interval: coordinate index out of range");
  const double xi = x[i], yi = prob.y()[i];
  Interval out;
  for_each_tuple_product(x, prob.y(), prob.order() - 1, [&](double px, double py) {
    const double a = px * xi, b = py * yi;
    const double r = a - b;
    if (std::fabs(r) <= kKinkRelativeTolerance * (std::fabs(a) + std::fabs(b))) {
      out.lo -= std::fabs(px);
      out.hi += std::fabs(px);
    } else {
      const double c = px * sign0(r);
      out.lo += c;
      out.hi += c;
    }
  });
  return out;
}

struct StationarityReport {
  bool stationary = false;
  std::vector<Interval> per_coordinate_interval;
  bool lemma1_zero_pattern_ok = false;
  bool lemma1_ratio_bound_ok = false;
  /// Largest d-fold ratio product over coordinates with y_i != 0.
  double max_ratio_product = 0.0;
};

inline StationarityReport is_clarke_stationary(const TensorProblem& prob,
                                               std::span<const double> x,
                                               double tol = kStationarityTolerance) {
  prob.check_point(x);
  StationarityReport rep;
  rep.stationary = true;
  rep.per_coordinate_interval.reserve(prob.dim());
  for (std::size_t i = 0; i < prob.dim(); ++i) {
    const Interval iv = clarke_interval(prob, x, i);
    rep.stationary = rep.stationary && iv.contains(0.0, tol);
    rep.per_coordinate_interval.push_back(iv);
  }

  rep.lemma1_zero_pattern_ok = true;
  Vector ratios;
  for (std::size_t i = 0; i < prob.dim(); ++i) {
    if (prob.y()[i] == 0.0) {
      rep.lemma1_zero_pattern_ok = rep.lemma1_zero_pattern_ok && std::fabs(x[i]) <= tol;
    } else {
      ratios.push_back(x[i] / prob.y()[i]);
    }
  }
  rep.max_ratio_product = max_ratio_product(ratios, prob.order());
  rep.lemma1_ratio_bound_ok = rep.max_ratio_product <= 1.0 + tol;
  return rep;
}

/// Nondecreasing set-valued step function of t:
///
///   S(t) = sum over (d-1)-tuples of |Y| q sign(q t - 1),   q = X / Y.
///
/// A tuple with q != 0 jumps by 2 w at t* = 1 / q where w = |X|; tuples with
/// q = 0 contribute nothing. `base` is the value to the left of every jump.
class Staircase {
public:
  struct Jump {
    double point;
    double weight;
  };

  Staircase(std::vector<Jump> jumps, double base) : jumps_(std::move(jumps)), base_(base) {}

  const std::vector<Jump>& jumps() const { return jumps_; }
  double base() const { return base_; }

  /// Interval value at t: closed interval spanning any jump located at t.
  Interval eval(double t) const {
    double below = base_;
    double at = 0.0;
    for (const auto& j : jumps_) {
      if (same_point(j.point, t)) {
        at += 2.0 * j.weight;
      } else if (j.point < t) {
        below += 2.0 * j.weight;
      }
    }
    return {below, below + at};
  }

  static bool same_point(double a, double b) {
    return std::fabs(a - b) <= kDedupRelativeTolerance * std::max(std::fabs(a), std::fabs(b));
  }

  static constexpr double kDedupRelativeTolerance = 1e-12;

private:
  std::vector<Jump> jumps_;
  double base_;
};

inline Staircase build_staircase(const TensorProblem& prob, std::span<const double> x) {
  const Vector ratios = ratios_to_truth(prob, x);
  require(std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; }),
          "build_staircase: x must be nonzero (the jump set is empty at x = 0)");

  std::vector<Staircase::Jump> raw;
  for_each_tuple_product(x, prob.y(), prob.order() - 1, [&](double px, double py) {
    if (px != 0.0) raw.push_back({py / px, std::fabs(px)});
  });
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.point < b.point; });

  std::vector<Staircase::Jump> merged;
  double total = 0.0;
  for (const auto& j : raw) {
    total += j.weight;
    if (!merged.empty() && Staircase::same_point(merged.back().point, j.point)) {
      merged.back().weight += j.weight;
    } else {
      merged.push_back(j);
    }
  }
  return Staircase(std::move(merged), -total);
}

/// Positive jump points must upper-bound every ratio x_i / y_i and negative
/// jump points must lower-bound them. Requires x to be Clarke-stationary.
inline bool verify_root_jump_separation(const TensorProblem& prob, std::span<const double> x,
                                        double tol = kStationarityTolerance) {
  if (!is_clarke_stationary(prob, x, tol).stationary) {
    throw InvalidArgument("verify_root_jump_separation: x is not Clarke-stationary");
  }
  const Vector ratios = ratios_to_truth(prob, x);
  if (std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; })) return true;
  const Staircase stairs = build_staircase(prob, x);
  for (const auto& j : stairs.jumps()) {
    const double slack = tol * std::max(1.0, std::fabs(j.point));
    for (double r : ratios) {
      if (j.point > 0.0 && r > j.point + slack) return false;
      if (j.point < 0.0 && r < j.point - slack) return false;
    }
  }
  return true;
}

/// A point with sum |y_i| x_i / y_i = 0 and every |x_i / y_i| < 1. It is
/// Clarke-stationary and lies in region S, yet f_1 strictly decreases along
/// directions that raise sum |y_i| x_i / y_i, so it is not a local minimum.
inline Vector make_remark_point(const TensorProblem& prob, std::uint64_t seed) {
  require(prob.dim() >= 2, "make_remark_point: needs n >= 2");
  require(prob.order() >= 2, "make_remark_point: needs d >= 2");
  for (double v : prob.y()) require(v != 0.0, "make_remark_point: requires every y_i != 0");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, prob.dim() - 1);
  std::size_t i = pick(rng);
  std::size_t j = pick(rng);
  while (j == i) j = pick(rng);
  if (j < i) std::swap(i, j);
  const double a = std::uniform_real_distribution<double>(0.1, 0.9)(rng);

  const double ayi = std::fabs(prob.y()[i]), ayj = std::fabs(prob.y()[j]);
  // ratios (r_i, r_j) with |y_i| r_i + |y_j| r_j = 0, scaled so max |r| = |a|
  double ri = a, rj = -a * ayi / ayj;
  const double scale = std::fabs(a) / std::max(std::fabs(ri), std::fabs(rj));
  ri *= scale;
  rj *= scale;

  Vector x(prob.dim(), 0.0);
  x[i] = ri * prob.y()[i];
  x[j] = rj * prob.y()[j];
  return x;
}

}  // namespace globfn
