#pragma once

// Rank-one tensor fitting objectives. For a ground truth y in R^n and order d
// every objective is built from the n^d residuals
//
//   r(i_1..i_d) = x_{i_1} ... x_{i_d} - y_{i_1} ... y_{i_d}
//
//   f_1    = sum |r|            f_p = sum |r|^p  (p > 1)
//   f_inf  = max |r|            h_p = f_p^(1/p)
//
// plus the order-2 dense variants sum |x_i x_j - b_ij| (L1) and
// sum (x_i x_j - b_ij)^2 (L2) used for the sparse-noise recovery runs.

#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "globfn/common.hpp"

namespace globfn {

inline constexpr std::size_t kDefaultTupleBudget = 10'000'000;

/// Ground truth y and tensor order d defining the rank-one target y^{(x)d}.
class TensorProblem {
public:
  TensorProblem(Vector y, int order, std::size_t tuple_budget = kDefaultTupleBudget)
      : y_(std::move(y)), order_(order) {
    require(!y_.empty(), "TensorProblem: y must have at least one entry");
    require(order_ >= 1, "TensorProblem: order d must be >= 1");
    for (double v : y_) require(std::isfinite(v), "TensorProblem: y must be finite");
    const std::size_t tuples = checked_power(y_.size(), static_cast<std::size_t>(order_));
    if (tuples > tuple_budget) {
      throw BudgetExceeded("TensorProblem: n^d = " + std::to_string(y_.size()) + "^" +
                           std::to_string(order_) + " exceeds the evaluation budget of " +
                           std::to_string(tuple_budget));
    }
  }

  const Vector& y() const { return y_; }
  std::size_t dim() const { return y_.size(); }
  int order() const { return order_; }
  bool even_order() const { return order_ % 2 == 0; }

  void check_point(std::span<const double> x) const {
    if (x.size() != y_.size()) {
      throw InvalidArgument("dimension mismatch: expected " + std::to_string(y_.size()) +
                            " coordinates, got " + std::to_string(x.size()));
    }
  }

private:
  Vector y_;
  int order_;
};

/// Exponent selecting f_1 (ONE), f_p with p > 1 (finite), or f_inf (INF).
class Exponent {
public:
  enum class Kind { One, Finite, Inf };

  static Exponent one() { return Exponent(Kind::One, 1.0); }
  static Exponent inf() { return Exponent(Kind::Inf, std::numeric_limits<double>::infinity()); }
  static Exponent finite(double p) {
    require(p > 1.0 && std::isfinite(p), "Exponent: finite p must satisfy p > 1");
    return Exponent(Kind::Finite, p);
  }

  Kind kind() const { return kind_; }
  double value() const { return p_; }

private:
  Exponent(Kind kind, double p) : kind_(kind), p_(p) {}
  Kind kind_;
  double p_;
};

namespace detail {
inline void require_p(double p) {
  require(p > 1.0 && std::isfinite(p), "exponent p must satisfy p > 1, got " + std::to_string(p));
}

/// |r|^(p-2) r with the value 0 at r = 0.
inline double signed_power(double r, double p) {
  if (r == 0.0) return 0.0;
  return std::copysign(std::pow(std::fabs(r), p - 1.0), r);
}
}  // namespace detail

inline double eval_f1(const TensorProblem& prob, std::span<const double> x) {
  prob.check_point(x);
  double sum = 0.0;
  for_each_tuple_product(x, prob.y(), prob.order(),
                         [&](double px, double py) { sum += std::fabs(px - py); });
  return sum;
}

inline double eval_fp(const TensorProblem& prob, std::span<const double> x, double p) {
  prob.check_point(x);
  detail::require_p(p);
  double sum = 0.0;
  for_each_tuple_product(x, prob.y(), prob.order(),
                         [&](double px, double py) { sum += std::pow(std::fabs(px - py), p); });
  return sum;
}

inline double eval_finf(const TensorProblem& prob, std::span<const double> x) {
  prob.check_point(x);
  double best = 0.0;
  for_each_tuple_product(x, prob.y(), prob.order(),
                         [&](double px, double py) { best = std::max(best, std::fabs(px - py)); });
  return best;
}

/// (sum |r|^p)^(1/p), evaluated as M (sum (|r|/M)^p)^(1/p) with M = max |r| so
/// large p does not overflow.
inline double eval_hp(const TensorProblem& prob, std::span<const double> x, double p) {
  detail::require_p(p);
  const double peak = eval_finf(prob, x);
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for_each_tuple_product(x, prob.y(), prob.order(), [&](double px, double py) {
    sum += std::pow(std::fabs(px - py) / peak, p);
  });
  return peak * std::pow(sum, 1.0 / p);
}

inline double eval(const TensorProblem& prob, std::span<const double> x, const Exponent& e) {
  switch (e.kind()) {
    case Exponent::Kind::One:
      return eval_f1(prob, x);
    case Exponent::Kind::Inf:
      return eval_finf(prob, x);
    case Exponent::Kind::Finite:
      break;
  }
  return eval_fp(prob, x, e.value());
}

namespace detail {
/// d * sum over (d-1)-tuples t of X(t) * psi(X(t) x_i - Y(t) y_i), for every i.
/// This is the exact derivative of sum_t phi(r_t) when psi = phi', since each
/// of the d positions of a tuple contributes the same partial sum.
template <class Psi>
Vector symmetric_partial_sums(const TensorProblem& prob, std::span<const double> x, Psi&& psi) {
  const std::size_t n = prob.dim();
  const auto& y = prob.y();
  Vector out(n, 0.0);
  for_each_tuple_product(x, y, prob.order() - 1, [&](double px, double py) {
    for (std::size_t i = 0; i < n; ++i) out[i] += px * psi(px * x[i] - py * y[i]);
  });
  for (double& v : out) v *= prob.order();
  return out;
}
}  // namespace detail

inline Vector grad_fp(const TensorProblem& prob, std::span<const double> x, double p) {
  prob.check_point(x);
  detail::require_p(p);
  Vector g = detail::symmetric_partial_sums(
      prob, x, [p](double r) { return detail::signed_power(r, p); });
  for (double& v : g) v *= p;
  return g;
}

/// Clarke subgradient of f_1 with the selection sign(0) := 0.
inline Vector subgrad_f1(const TensorProblem& prob, std::span<const double> x) {
  prob.check_point(x);
  return detail::symmetric_partial_sums(prob, x, sign0);
}

/// Interval product propagation: the largest value of r_{i_1} ... r_{i_d} over
/// all d-tuples, where r = x / y. The achievable product set after k factors
/// has its extremes among the products of the previous extremes with the
/// extremes of r, so O(n + d) work suffices.
inline double max_ratio_product(std::span<const double> ratios, int order) {
  if (ratios.empty()) return 0.0;
  const auto [rmin_it, rmax_it] = std::minmax_element(ratios.begin(), ratios.end());
  const double rmin = *rmin_it, rmax = *rmax_it;
  double lo = 1.0, hi = 1.0;
  for (int k = 0; k < order; ++k) {
    const double c[4] = {lo * rmin, lo * rmax, hi * rmin, hi * rmax};
    lo = *std::min_element(c, c + 4);
    hi = *std::max_element(c, c + 4);
  }
  return hi;
}

inline constexpr double kRegionTolerance = 1e-12;

inline Vector ratios_to_truth(const TensorProblem& prob, std::span<const double> x) {
  prob.check_point(x);
  for (double v : prob.y()) {
    require(v != 0.0, "region S requires every y_i != 0");
  }
  Vector r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] / prob.y()[i];
  return r;
}

/// True iff every d-fold ratio product x_{i_1}..x_{i_d} / (y_{i_1}..y_{i_d}) <= 1.
inline bool in_region_S(const TensorProblem& prob, std::span<const double> x) {
  const Vector r = ratios_to_truth(prob, x);
  return max_ratio_product(r, prob.order()) <= 1.0 + kRegionTolerance;
}

/// On region S: f_1(x) = (sum |y_i|)^d - (sum |y_i| x_i / y_i)^d.
inline double closed_form_f1_on_S(const TensorProblem& prob, std::span<const double> x) {
  if (!in_region_S(prob, x)) {
    throw InvalidArgument("closed_form_f1_on_S: point lies outside region S");
  }
  double total = 0.0, weighted = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ay = std::fabs(prob.y()[i]);
    total += ay;
    weighted += ay * (x[i] / prob.y()[i]);
  }
  return std::pow(total, prob.order()) - std::pow(weighted, prob.order());
}

// ---------------------------------------------------------------------------
// Dense order-2 targets

enum class DenseMode { L1, L2 };

inline std::string to_string(DenseMode m) { return m == DenseMode::L1 ? "l1" : "l2"; }

inline DenseMode parse_dense_mode(const std::string& s) {
  if (s == "l1" || s == "L1" || s == "lav" || s == "LAV") return DenseMode::L1;
  if (s == "l2" || s == "L2" || s == "ls" || s == "LS") return DenseMode::L2;
  throw InvalidArgument("unknown mode '" + s + "' (expected l1 or l2)");
}

/// Explicit n x n target b_ij = y_i y_j + noise, stored row-major.
class DenseTarget {
public:
  using Position = std::pair<std::size_t, std::size_t>;

  DenseTarget(std::size_t n, Vector entries, std::vector<Position> noise_mask = {})
      : n_(n), entries_(std::move(entries)), noise_mask_(std::move(noise_mask)) {
    require(n_ >= 1, "DenseTarget: n must be >= 1");
    require(entries_.size() == n_ * n_, "DenseTarget: entries must hold n*n values");
    for (double v : entries_) require(std::isfinite(v), "DenseTarget: entries must be finite");
    for (const auto& [i, j] : noise_mask_) {
      require(i < n_ && j < n_, "DenseTarget: noise position out of bounds");
    }
  }

  static DenseTarget noiseless(std::span<const double> y) {
    const std::size_t n = y.size();
    Vector b(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b[i * n + j] = y[i] * y[j];
    return DenseTarget(n, std::move(b));
  }

  std::size_t dim() const { return n_; }
  std::size_t terms() const { return n_ * n_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  const Vector& entries() const { return entries_; }
  const std::vector<Position>& noise_mask() const { return noise_mask_; }

  void check_point(std::span<const double> x) const {
    if (x.size() != n_) {
      throw InvalidArgument("dimension mismatch: expected " + std::to_string(n_) +
                            " coordinates, got " + std::to_string(x.size()));
    }
  }

private:
  std::size_t n_;
  Vector entries_;
  std::vector<Position> noise_mask_;
};

inline double eval_dense(const DenseTarget& target, std::span<const double> x, DenseMode mode) {
  target.check_point(x);
  const std::size_t n = target.dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = x[i] * x[j] - target.at(i, j);
      sum += mode == DenseMode::L1 ? std::fabs(r) : r * r;
    }
  }
  return sum;
}

/// Adds the (sub)gradient of the terms listed in `terms` (flat indices i*n+j)
/// to `out`. L1 uses sign(0) := 0.
inline void accumulate_dense_subgrad(const DenseTarget& target, std::span<const double> x,
                                     DenseMode mode, std::span<const std::size_t> terms,
                                     std::span<double> out) {
  const std::size_t n = target.dim();
  for (std::size_t t : terms) {
    const std::size_t i = t / n, j = t % n;
    const double r = x[i] * x[j] - target.entries()[t];
    const double w = mode == DenseMode::L1 ? sign0(r) : 2.0 * r;
    out[i] += w * x[j];
    out[j] += w * x[i];
  }
}

inline Vector subgrad_dense(const DenseTarget& target, std::span<const double> x, DenseMode mode) {
  target.check_point(x);
  const std::size_t n = target.dim();
  Vector g(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = x[i] * x[j] - target.at(i, j);
      const double w = mode == DenseMode::L1 ? sign0(r) : 2.0 * r;
      g[i] += w * x[j];
      g[j] += w * x[i];
    }
  }
  return g;
}

}  // namespace globfn
