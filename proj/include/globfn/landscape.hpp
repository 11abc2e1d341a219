#pragma once

// Grid-scale landscape checks. Everything here is desk-scale evidence on a
// finite grid: a grid point is a grid-local minimum when none of its Moore
// neighbours (3^n - 1 of them, diagonals included) has a strictly smaller
// value. Verdicts compare those minima with the smallest grid value.

#include <deque>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "globfn/objectives.hpp"

namespace globfn {

inline constexpr std::size_t kMaxGridPoints = 10'000'000;
inline constexpr double kDefaultGridTolerance = 1e-9;

class GridBox {
public:
  GridBox(Vector lower, Vector upper, std::size_t resolution)
      : lower_(std::move(lower)), upper_(std::move(upper)), resolution_(resolution) {
    require(!lower_.empty(), "GridBox: dimension must be >= 1");
    require(lower_.size() == upper_.size(), "GridBox: corner dimensions differ");
    require(resolution_ >= 3, "GridBox: resolution must be >= 3 points per axis");
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      require(std::isfinite(lower_[k]) && std::isfinite(upper_[k]) && lower_[k] < upper_[k],
              "GridBox: need finite lower < upper on every axis");
    }
    const std::size_t total = checked_power(resolution_, lower_.size());
    if (total > kMaxGridPoints) {
      throw BudgetExceeded("GridBox: " + std::to_string(resolution_) + "^" +
                           std::to_string(lower_.size()) + " grid points exceed the limit of " +
                           std::to_string(kMaxGridPoints));
    }
    size_ = total;
  }

  static GridBox cube(std::size_t dim, double lo, double hi, std::size_t resolution) {
    return GridBox(Vector(dim, lo), Vector(dim, hi), resolution);
  }

  std::size_t dim() const { return lower_.size(); }
  std::size_t resolution() const { return resolution_; }
  std::size_t size() const { return size_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  double step(std::size_t axis) const {
    return (upper_[axis] - lower_[axis]) / static_cast<double>(resolution_ - 1);
  }

  double coordinate(std::size_t axis, std::size_t k) const {
    if (k + 1 == resolution_) return upper_[axis];
    return lower_[axis] + static_cast<double>(k) * step(axis);
  }

  /// Flat index -> per-axis indices; axis 0 varies slowest.
  void unravel(std::size_t index, std::span<std::size_t> out) const {
    for (std::size_t a = dim(); a-- > 0;) {
      out[a] = index % resolution_;
      index /= resolution_;
    }
  }

  void point(std::size_t index, std::span<double> out) const {
    for (std::size_t a = dim(); a-- > 0;) {
      out[a] = coordinate(a, index % resolution_);
      index /= resolution_;
    }
  }

  Vector point(std::size_t index) const {
    Vector p(dim());
    point(index, p);
    return p;
  }

private:
  Vector lower_, upper_;
  std::size_t resolution_;
  std::size_t size_ = 0;
};

using PointPredicate = std::function<bool(std::span<const double>)>;

struct GridOptions {
  /// Restricts the grid to points where the mask holds; empty means all.
  PointPredicate mask;
  std::size_t threads = 0;
  /// The box is a window onto a larger domain: points on its faces are never
  /// reported as grid-local minima, since the function continues past them.
  bool window = false;
};

enum class Verdict { Global, WeaklyGlobalOnly, SpuriousFound };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Global:
      return "GLOBAL";
    case Verdict::WeaklyGlobalOnly:
      return "WEAKLY_GLOBAL_ONLY";
    case Verdict::SpuriousFound:
      return "SPURIOUS_FOUND";
  }
  return "?";
}

struct GridMinimum {
  Vector point;
  double value = 0.0;
  std::size_t index = 0;  // flat grid index
};

/// Moore-connected group of grid-local minima with value spread <= tolerance.
struct Plateau {
  std::vector<std::size_t> members;  // indices into GridReport::grid_local_minima
  double value = 0.0;                // smallest member value
  double spread = 0.0;
  bool global = false;
  /// Every neighbour outside the plateau is strictly higher (beyond tolerance).
  bool strict = false;
};

struct GridReport {
  std::vector<GridMinimum> grid_local_minima;
  std::vector<Plateau> plateaus;
  double global_value = 0.0;
  Verdict verdict = Verdict::Global;
  double tolerance = kDefaultGridTolerance;
};

/// Function values sampled on a (possibly masked) grid.
class GridValues {
public:
  GridValues(GridBox box, std::vector<double> values, std::vector<char> active, bool window = false)
      : box_(std::move(box)), values_(std::move(values)), active_(std::move(active)), window_(window) {
    const std::size_t n = box_.dim();
    std::size_t count = 1;
    for (std::size_t a = 0; a < n; ++a) count *= 3;
    for (std::size_t c = 0; c < count; ++c) {
      std::vector<int> delta(n);
      std::size_t rest = c;
      bool zero = true;
      for (std::size_t a = n; a-- > 0;) {
        delta[a] = static_cast<int>(rest % 3) - 1;
        rest /= 3;
        zero = zero && delta[a] == 0;
      }
      if (!zero) offsets_.push_back(std::move(delta));
    }
  }

  const GridBox& box() const { return box_; }
  const std::vector<double>& values() const { return values_; }
  bool active(std::size_t i) const { return active_[i] != 0; }
  bool window() const { return window_; }

  bool on_face(std::size_t i, std::span<std::size_t> scratch) const {
    box_.unravel(i, scratch);
    for (std::size_t k : scratch)
      if (k == 0 || k + 1 == box_.resolution()) return true;
    return false;
  }

  std::size_t active_count() const {
    return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), char{1}));
  }

  /// Calls visit(j) for every active Moore neighbour j of grid index i.
  template <class Visit>
  void for_each_neighbor(std::size_t i, std::span<std::size_t> scratch, Visit&& visit) const {
    const std::size_t n = box_.dim();
    const auto res = static_cast<long long>(box_.resolution());
    box_.unravel(i, scratch);
    for (const auto& delta : offsets_) {
      std::size_t j = 0;
      bool inside = true;
      for (std::size_t a = 0; a < n; ++a) {
        const long long k = static_cast<long long>(scratch[a]) + delta[a];
        if (k < 0 || k >= res) {
          inside = false;
          break;
        }
        j = j * box_.resolution() + static_cast<std::size_t>(k);
      }
      if (inside && active_[j]) visit(j);
    }
  }

  double min_value() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (active_[i]) best = std::min(best, values_[i]);
    return best;
  }

  std::vector<std::size_t> argmin() const {
    const double best = min_value();
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (active_[i] && values_[i] == best) out.push_back(i);
    return out;
  }

  /// Flat indices of the grid-local minima in increasing order.
  std::vector<std::size_t> local_minima(std::size_t threads = 0) const {
    std::vector<char> flag(values_.size(), 0);
    parallel_for(values_.size(), threads, [&](std::size_t begin, std::size_t end) {
      std::vector<std::size_t> scratch(box_.dim());
      for (std::size_t i = begin; i < end; ++i) {
        if (!active_[i] || (window_ && on_face(i, scratch))) continue;
        bool minimal = true;
        for_each_neighbor(i, scratch, [&](std::size_t j) {
          if (values_[j] < values_[i]) minimal = false;
        });
        flag[i] = minimal ? 1 : 0;
      }
    });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flag.size(); ++i)
      if (flag[i]) out.push_back(i);
    return out;
  }

  /// Values after applying a scalar map to every sample.
  template <class Phi>
  GridValues mapped(Phi&& phi) const {
    std::vector<double> v(values_.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = active_[i] ? phi(values_[i]) : std::numeric_limits<double>::quiet_NaN();
    return GridValues(box_, std::move(v), active_, window_);
  }

private:
  GridBox box_;
  std::vector<double> values_;
  std::vector<char> active_;
  bool window_ = false;
  std::vector<std::vector<int>> offsets_;
};

template <class F>
GridValues sample_grid(F&& f, const GridBox& box, const GridOptions& opts = {}) {
  std::vector<double> values(box.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> active(box.size(), 0);
  parallel_for(box.size(), opts.threads, [&](std::size_t begin, std::size_t end) {
    Vector p(box.dim());
    for (std::size_t i = begin; i < end; ++i) {
      box.point(i, p);
      if (opts.mask && !opts.mask(p)) continue;
      values[i] = f(std::span<const double>(p));
      active[i] = 1;
    }
  });
  return GridValues(box, std::move(values), std::move(active), opts.window);
}

namespace detail {

inline std::vector<GridMinimum> collect_minima(const GridValues& grid,
                                               const std::vector<std::size_t>& indices) {
  std::vector<GridMinimum> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back({grid.box().point(i), grid.values()[i], i});
  return out;
}

inline std::vector<Plateau> cluster_plateaus(const GridValues& grid,
                                             const std::vector<GridMinimum>& minima,
                                             double global_value, double tol) {
  const std::size_t total = grid.values().size();
  // grid index -> position in `minima`, or npos
  constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot(total, npos);
  for (std::size_t m = 0; m < minima.size(); ++m) slot[minima[m].index] = m;

  std::vector<char> seen(minima.size(), 0);
  std::vector<std::size_t> scratch(grid.box().dim());
  std::vector<Plateau> plateaus;
  for (std::size_t seed = 0; seed < minima.size(); ++seed) {
    if (seen[seed]) continue;
    Plateau pl;
    double lo = minima[seed].value, hi = lo;
    std::deque<std::size_t> queue{seed};
    seen[seed] = 1;
    while (!queue.empty()) {
      const std::size_t m = queue.front();
      queue.pop_front();
      pl.members.push_back(m);
      grid.for_each_neighbor(minima[m].index, scratch, [&](std::size_t j) {
        const std::size_t other = slot[j];
        if (other == npos || seen[other]) return;
        const double v = minima[other].value;
        if (std::max(hi, v) - std::min(lo, v) > tol) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        seen[other] = 1;
        queue.push_back(other);
      });
    }
    std::sort(pl.members.begin(), pl.members.end());
    pl.value = lo;
    pl.spread = hi - lo;
    pl.global = lo <= global_value + tol;

    bool escape = false;
    for (std::size_t m : pl.members) {
      grid.for_each_neighbor(minima[m].index, scratch, [&](std::size_t j) {
        const std::size_t other = slot[j];
        if (other != npos &&
            std::binary_search(pl.members.begin(), pl.members.end(), other)) {
          return;
        }
        if (grid.values()[j] <= hi + tol) escape = true;
      });
    }
    pl.strict = !escape;
    plateaus.push_back(std::move(pl));
  }
  return plateaus;
}

inline GridReport build_report(const GridValues& grid, double tol, bool weak, std::size_t threads) {
  require(grid.active_count() > 0, "landscape: the (masked) grid has no points");
  require(tol >= 0.0, "landscape: tolerance must be >= 0");
  GridReport rep;
  rep.tolerance = tol;
  rep.global_value = grid.min_value();
  rep.grid_local_minima = collect_minima(grid, grid.local_minima(threads));
  rep.plateaus = cluster_plateaus(grid, rep.grid_local_minima, rep.global_value, tol);

  const double cut = rep.global_value + tol;
  const bool all_global = std::all_of(rep.grid_local_minima.begin(), rep.grid_local_minima.end(),
                                      [cut](const GridMinimum& m) { return m.value <= cut; });
  if (all_global) {
    rep.verdict = Verdict::Global;
  } else if (!weak) {
    rep.verdict = Verdict::SpuriousFound;
  } else {
    const bool any_strict_spurious =
        std::any_of(rep.plateaus.begin(), rep.plateaus.end(),
                    [](const Plateau& p) { return !p.global && p.strict; });
    rep.verdict = any_strict_spurious ? Verdict::SpuriousFound : Verdict::WeaklyGlobalOnly;
  }
  return rep;
}

}  // namespace detail

/// Exhaustive grid-local minima, in grid order.
template <class F>
std::vector<GridMinimum> grid_local_minima(F&& f, const GridBox& box, const GridOptions& opts = {}) {
  const GridValues grid = sample_grid(f, box, opts);
  return detail::collect_minima(grid, grid.local_minima(opts.threads));
}

inline GridReport verify_global(const GridValues& grid, double tol = kDefaultGridTolerance,
                                std::size_t threads = 0) {
  return detail::build_report(grid, tol, false, threads);
}

/// GLOBAL iff every grid-local minimum is within tol of the smallest grid value.
template <class F>
GridReport verify_global(F&& f, const GridBox& box, double tol = kDefaultGridTolerance,
                         const GridOptions& opts = {}) {
  return verify_global(sample_grid(f, box, opts), tol, opts.threads);
}

inline GridReport verify_weakly_global(const GridValues& grid, double tol = kDefaultGridTolerance,
                                       std::size_t threads = 0) {
  return detail::build_report(grid, tol, true, threads);
}

/// Like verify_global, but a non-global plateau only counts as spurious when
/// it is strict, i.e. every neighbour outside it is higher by more than tol.
template <class F>
GridReport verify_weakly_global(F&& f, const GridBox& box, double tol = kDefaultGridTolerance,
                                const GridOptions& opts = {}) {
  return verify_weakly_global(sample_grid(f, box, opts), tol, opts.threads);
}

struct PropertyCheck {
  bool holds = false;
  Verdict lhs = Verdict::Global;
  Verdict rhs = Verdict::Global;
  bool argmin_match = false;
};

/// f and phi(f) for strictly increasing phi: verdicts and grid argmin sets agree.
template <class F, class Phi>
PropertyCheck check_composition(F&& f, Phi&& phi, const GridBox& box,
                                double tol = kDefaultGridTolerance, const GridOptions& opts = {}) {
  const GridValues base = sample_grid(f, box, opts);
  const GridValues composed = base.mapped(phi);
  PropertyCheck out;
  out.lhs = verify_global(base, tol, opts.threads).verdict;
  out.rhs = verify_global(composed, tol, opts.threads).verdict;
  out.argmin_match = base.argmin() == composed.argmin();
  out.holds = out.lhs == out.rhs && out.argmin_match;
  return out;
}

using VectorMap = std::function<Vector(std::span<const double>)>;

/// f on the source grid vs f o varphi^{-1} on the target grid. Argmin sets
/// correspond when each mapped argmin lands within one target cell plus the
/// image of one source cell of an argmin on the other side.
template <class F>
PropertyCheck check_change_of_variables(F&& f, const VectorMap& varphi, const VectorMap& varphi_inv,
                                        const GridBox& source, const GridBox& target,
                                        double tol = kDefaultGridTolerance,
                                        const GridOptions& source_opts = {},
                                        const GridOptions& target_opts = {}) {
  require(source.dim() == target.dim(), "change of variables: box dimensions differ");
  const GridValues src = sample_grid(f, source, source_opts);
  const GridValues tgt = sample_grid(
      [&](std::span<const double> u) {
        const Vector x = varphi_inv(u);
        return f(std::span<const double>(x));
      },
      target, target_opts);

  PropertyCheck out;
  out.lhs = verify_global(src, tol, source_opts.threads).verdict;
  out.rhs = verify_global(tgt, tol, target_opts.threads).verdict;

  const std::size_t n = source.dim();
  double target_cell = 0.0;
  for (std::size_t a = 0; a < n; ++a) target_cell = std::max(target_cell, target.step(a));

  auto chebyshev = [](std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
    return m;
  };
  // image of one source step around p, in target coordinates
  auto source_cell_image = [&](std::span<const double> p) {
    const Vector fp = varphi(p);
    double m = 0.0;
    Vector q(p.begin(), p.end());
    for (std::size_t a = 0; a < n; ++a) {
      for (double s : {-1.0, 1.0}) {
        q[a] = p[a] + s * source.step(a);
        m = std::max(m, chebyshev(varphi(q), fp));
        q[a] = p[a];
      }
    }
    return m;
  };

  std::vector<Vector> src_mapped, tgt_points;
  std::vector<double> src_slack;
  for (std::size_t i : src.argmin()) {
    const Vector p = source.point(i);
    src_mapped.push_back(varphi(p));
    src_slack.push_back(target_cell + source_cell_image(p));
  }
  for (std::size_t i : tgt.argmin()) tgt_points.push_back(target.point(i));

  bool match = !src_mapped.empty() && !tgt_points.empty();
  for (std::size_t k = 0; match && k < src_mapped.size(); ++k) {
    match = std::any_of(tgt_points.begin(), tgt_points.end(), [&](const Vector& q) {
      return chebyshev(src_mapped[k], q) <= src_slack[k] * (1.0 + 1e-9);
    });
  }
  for (std::size_t k = 0; match && k < tgt_points.size(); ++k) {
    match = false;
    for (std::size_t s = 0; s < src_mapped.size() && !match; ++s) {
      match = chebyshev(src_mapped[s], tgt_points[k]) <= src_slack[s] * (1.0 + 1e-9);
    }
  }
  out.argmin_match = match;
  out.holds = out.lhs == out.rhs && match;
  return out;
}

struct ConvergenceRow {
  double p = 0.0;
  double sup_distance = 0.0;
};

/// sup over the grid of |family(p, x) - target(x)| for each p in the schedule.
template <class Family, class Target>
std::vector<ConvergenceRow> check_compact_convergence(Family&& family, Target&& target,
                                                      const GridBox& box,
                                                      std::span<const double> p_schedule,
                                                      const GridOptions& opts = {}) {
  const GridValues reference = sample_grid(target, box, opts);
  std::vector<ConvergenceRow> rows;
  for (double p : p_schedule) {
    const GridValues approx = sample_grid(
        [&](std::span<const double> x) { return family(p, x); }, box, opts);
    double sup = 0.0;
    for (std::size_t i = 0; i < box.size(); ++i) {
      if (!reference.active(i)) continue;
      sup = std::max(sup, std::fabs(approx.values()[i] - reference.values()[i]));
    }
    rows.push_back({p, sup});
  }
  return rows;
}

inline bool strictly_decreasing(const std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (!(rows[k].sup_distance < rows[k - 1].sup_distance)) return false;
  return true;
}

/// f_1 restricted to the region-S grid points.
inline GridReport verify_on_region_S(const TensorProblem& prob, const GridBox& box,
                                     double tol = kDefaultGridTolerance, std::size_t threads = 0) {
  require(box.dim() == prob.dim(), "verify_on_region_S: box dimension differs from n");
  for (double v : prob.y()) require(v != 0.0, "verify_on_region_S: requires every y_i != 0");
  GridOptions opts;
  opts.threads = threads;
  opts.mask = [&prob](std::span<const double> x) { return in_region_S(prob, x); };
  const GridValues grid =
      sample_grid([&prob](std::span<const double> x) { return eval_f1(prob, x); }, box, opts);
  if (grid.active_count() == 0) {
    throw InvalidArgument("verify_on_region_S: no grid point of the box lies in region S");
  }
  return verify_global(grid, tol, threads);
}

}  // namespace globfn
