#pragma once

// Named example functions whose landscape is known in closed form.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "globfn/landscape.hpp"

namespace globfn::gallery {

/// (x^2 + x^4) / (1 + x^4): global on R, minimum 0 at x = 0, tends to 1.
inline double rational_global(double x) {
  const double x2 = x * x, x4 = x2 * x2;
  return (x2 + x4) / (1.0 + x4);
}

/// Global function on [-1,1]^2 with no strictly decreasing path from (0, 1/2)
/// to its minimizers [-1,1] x {-1}.
inline double nopath(double x1, double x2) {
  if (!(x1 >= -1.0 && x1 <= 1.0 && x2 >= -1.0 && x2 <= 1.0)) {
    throw InvalidArgument("nopath: point outside [-1,1]^2");
  }
  // |x1|^3 (sin(-1/|x1|) + 1); bounded oscillation times |x1|^3, so 0 at x1 = 0
  const double ax = std::fabs(x1);
  const double a = ax == 0.0 ? 0.0 : ax * ax * ax * (std::sin(-1.0 / ax) + 1.0);
  if (x2 >= 0.0) return -4.0 * a * (1.0 - x2);
  return (12.0 * a - 2.0) * x2 * x2 * x2 + (20.0 * a - 3.0) * x2 * x2 + 4.0 * a * x2 - 4.0 * a;
}

/// (x2 - x1^2)(x2 - 4 x1^2): (0,0) has no descent direction, yet a curved
/// descent path t -> (sqrt(10)/4 t, t^2) exists along which f = -9/16 t^4.
inline double hestenes(double x1, double x2) {
  return (x2 - x1 * x1) * (x2 - 4.0 * x1 * x1);
}

/// Distance to the nearest integer.
inline double nearest_integer_distance(double x) { return std::fabs(x - std::nearbyint(x)); }

inline constexpr int kDefaultTakagiTerms = 48;

/// Takagi curve sum_{k < terms} s(2^k x) / 2^k; truncation error <= 2^-terms.
inline double takagi(double x, int terms = kDefaultTakagiTerms) {
  require(terms >= 1, "takagi: terms must be >= 1");
  double sum = 0.0, scale = 1.0, arg = x;
  for (int k = 0; k < terms; ++k) {
    sum += nearest_integer_distance(arg) * scale;
    arg *= 2.0;
    scale *= 0.5;
  }
  return sum;
}

/// |2 x2 - 1| T(x1): a global function that is nowhere differentiable.
inline double takagi_bivariate(double x1, double x2, int terms = kDefaultTakagiTerms) {
  require(terms >= 1, "takagi_bivariate: terms must be >= 1");
  return std::fabs(2.0 * x2 - 1.0) * takagi(x1, terms);
}

/// |max(-1, |x| - 2)|: both factors are global on R but the composition has
/// a spurious flat minimum of value 1 on [-1, 1].
inline double composition_counterexample(double x) {
  return std::fabs(std::max(-1.0, std::fabs(x) - 2.0));
}

enum class Claim {
  Global,
  GlobalNoDescentPath,
  GlobalNowhereDiff,
  NotGlobalComposition,
  GlobalNoDescentDirection,
};

inline std::string to_string(Claim c) {
  switch (c) {
    case Claim::Global:
      return "GLOBAL";
    case Claim::GlobalNoDescentPath:
      return "GLOBAL_NO_DESCENT_PATH";
    case Claim::GlobalNowhereDiff:
      return "GLOBAL_NOWHERE_DIFF";
    case Claim::NotGlobalComposition:
      return "NOT_GLOBAL_COMPOSITION";
    case Claim::GlobalNoDescentDirection:
      return "GLOBAL_NO_DESCENT_DIRECTION";
  }
  return "?";
}

/// Grid verdict the claim predicts.
inline Verdict expected_verdict(Claim c) {
  return c == Claim::NotGlobalComposition ? Verdict::SpuriousFound : Verdict::Global;
}

struct GalleryEntry {
  std::string name;
  int arity = 1;
  GridBox domain_box;
  Claim claimed_property = Claim::Global;
  std::function<double(std::span<const double>)> eval;
  /// Domain extends past the box (R, R^2 or an open square); see GridOptions::window.
  bool window = false;

  GridOptions grid_options(std::size_t threads = 0) const {
    GridOptions o;
    o.threads = threads;
    o.window = window;
    return o;
  }
};

inline std::vector<GalleryEntry> entries() {
  std::vector<GalleryEntry> out;
  out.push_back({"rational_global", 1, GridBox::cube(1, -5.0, 5.0, 1001), Claim::Global,
                 [](std::span<const double> x) { return rational_global(x[0]); }, true});
  out.push_back({"nopath", 2, GridBox::cube(2, -1.0, 1.0, 201), Claim::GlobalNoDescentPath,
                 [](std::span<const double> x) { return nopath(x[0], x[1]); }});
  // Even resolution keeps (0,0) off the grid: no Moore step follows the curved
  // descent path there, so the origin would otherwise read as a grid minimum.
  out.push_back({"hestenes", 2, GridBox::cube(2, -1.0, 1.0, 200),
                 Claim::GlobalNoDescentDirection,
                 [](std::span<const double> x) { return hestenes(x[0], x[1]); }, true});
  // 0.01 step with x2 = 0.5 on the grid; the open square (0,1) is avoided.
  out.push_back({"takagi_bivariate", 2, GridBox::cube(2, 0.01, 0.99, 99),
                 Claim::GlobalNowhereDiff,
                 [](std::span<const double> x) { return takagi_bivariate(x[0], x[1]); }, true});
  out.push_back({"composition_counterexample", 1, GridBox::cube(1, -4.0, 4.0, 801),
                 Claim::NotGlobalComposition,
                 [](std::span<const double> x) { return composition_counterexample(x[0]); }, true});
  return out;
}

inline std::optional<GalleryEntry> find(const std::string& name) {
  for (auto& e : entries())
    if (e.name == name) return e;
  return std::nullopt;
}

}  // namespace globfn::gallery
