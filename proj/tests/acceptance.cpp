// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion; exit 0 iff all
// selected criteria pass.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "globfn/experiments.hpp"
#include "globfn/gallery.hpp"
#include "globfn/landscape.hpp"
#include "globfn/stationarity.hpp"
#include "oracles.hpp"

using namespace globfn;

namespace {

// pinned tolerances
constexpr double kLavFloor = 0.9;
constexpr double kLsCeiling = 0.2;
constexpr double kLsNoiselessFloor = 0.95;
constexpr double kClosedFormRel = 1e-9;
constexpr double kLemmaTol = 1e-9;
constexpr double kRemarkRadius = 1e-2;
constexpr double kConvergenceTarget = 0.05;
constexpr double kGradRel = 1e-5;
constexpr double kPathIdentity = 1e-12;

struct Result {
  bool pass = true;
  std::string detail;
};

double cheb(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
  return m;
}

Result sparse_noise() {
  ExperimentConfig c = ExperimentConfig::desk(20);
  c.noisy_counts = {0, 5, 10, 40, 100, 400};
  const ExperimentResult r = run_sweep(c);
  Result out;
  std::ostringstream d;
  for (std::size_t k : c.noisy_counts) {
    const double lav = r.find(DenseMode::L1, k)->rate, ls = r.find(DenseMode::L2, k)->rate;
    d << k << ":" << lav << "/" << ls << " ";
    if (k <= 100 && lav < kLavFloor) out.pass = false;
    if (k > 0 && lav < ls) out.pass = false;
    if (k >= 5 && ls > kLsCeiling) out.pass = false;
    if (k == 0 && ls < kLsNoiselessFloor) out.pass = false;
  }
  out.detail = "count:lav/ls " + d.str();
  return out;
}

Result no_spurious_minima() {
  std::mt19937_64 rng(2002);
  Result out;
  int global = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 2;
    const int d = 2 + (k / 2) % 2;
    const TensorProblem prob(oracle::signed_magnitudes(n, 0.5, 1.5, rng), d);
    const GridBox box = GridBox::cube(n, -2, 2, n == 2 ? 201 : 101);
    const auto rep = verify_global([&](std::span<const double> x) { return eval_f1(prob, x); }, box);
    Vector my = prob.y();
    for (double& v : my) v = -v;
    bool near = true;
    for (const auto& m : rep.grid_local_minima) {
      double dist = cheb(m.point, prob.y());
      if (d % 2 == 0) dist = std::min(dist, cheb(m.point, my));
      near = near && dist <= box.step(0) + 1e-12;
    }
    if (rep.verdict == Verdict::Global && near) ++global;
  }
  out.pass = global == 20;
  out.detail = std::to_string(global) + "/20 GLOBAL with minima within one cell";
  return out;
}

Result closed_form() {
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int k = 0; k < 10; ++k) {
    const std::size_t n = 2 + k % 3;
    const int d = 2 + k % 2;
    const TensorProblem prob(oracle::signed_magnitudes(n, 0.5, 1.5, rng), d);
    int hits = 0;
    while (hits < 1000) {
      Vector x = oracle::uniform_vec(n, -1.3, 1.3, rng);
      for (std::size_t i = 0; i < n; ++i) x[i] *= prob.y()[i];
      if (!oracle::in_S(prob.y(), x, d)) continue;
      const double a = closed_form_f1_on_S(prob, x), b = oracle::f1(prob.y(), x, d);
      worst = std::max(worst, std::fabs(a - b) / std::max(1.0, std::fabs(b)));
      ++hits;
      ++checked;
    }
  }
  return {worst <= kClosedFormRel, std::to_string(checked) + " points, max rel err " + format_double(worst)};
}

Result clarke() {
  std::mt19937_64 rng(4004);
  bool a = true, b = true, d = true;
  int remark_ok = 0, found = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 3;
    const int ord = 2 + k % 3;
    const TensorProblem prob(oracle::signed_magnitudes(n, 0.5, 1.5, rng), ord);
    Vector my = prob.y();
    for (double& v : my) v = -v;
    a = a && is_clarke_stationary(prob, prob.y()).stationary;
    if (ord % 2 == 0) a = a && is_clarke_stationary(prob, my).stationary;

    // (c) remark construction
    const Vector x = make_remark_point(prob, static_cast<std::uint64_t>(k));
    const bool stat = is_clarke_stationary(prob, x).stationary;
    const bool in_s = in_region_S(prob, x) && oracle::in_S(prob.y(), x, ord);
    std::mt19937_64 ball(static_cast<std::uint64_t>(k));
    const double fx = oracle::f1(prob.y(), x, ord);
    const double best = oracle::sphere_min([&](const Vector& z) { return oracle::f1(prob.y(), z, ord); }, x,
                                           kRemarkRadius, 10000, ball);
    if (stat && in_s && best < fx) ++remark_ok;

    // (b), (d) over a lattice of candidate ratios plus the constructions
    std::vector<Vector> cands{prob.y(), my, x, Vector(n, 0.0)};
    const double levels[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 5;
    for (std::size_t code = 0; code < total; ++code) {
      Vector c(n);
      std::size_t rest = code;
      for (std::size_t i = 0; i < n; ++i, rest /= 5) c[i] = levels[rest % 5] * prob.y()[i];
      cands.push_back(c);
    }
    for (const Vector& c : cands) {
      const auto rep = is_clarke_stationary(prob, c);
      if (!rep.stationary) continue;
      ++found;
      b = b && rep.lemma1_zero_pattern_ok && rep.max_ratio_product <= 1.0 + kLemmaTol;
      if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; })) continue;
      const Staircase s = build_staircase(prob, c);
      for (std::size_t i = 0; i < n; ++i) d = d && s.eval(c[i] / prob.y()[i]).contains(0.0, kLemmaTol);
    }
  }
  std::ostringstream det;
  det << std::boolalpha << "(a) " << a << " (b) " << b << " over " << found << " stationary points (c) "
      << remark_ok << "/20 (d) " << d;
  return {a && b && remark_ok == 20 && d, det.str()};
}

Result convergence() {
  const TensorProblem prob({1.0, -0.75}, 2);
  const GridBox box = GridBox::cube(2, -2, 2, 201);
  const std::vector<double> fp_ps{2, 1.5, 1.25, 1.1, 1.01}, hp_ps{8, 32, 128};
  const auto fp = check_compact_convergence(
      [&](double p, std::span<const double> x) { return eval_fp(prob, x, p); },
      [&](std::span<const double> x) { return eval_f1(prob, x); }, box, fp_ps);
  const auto hp = check_compact_convergence(
      [&](double p, std::span<const double> x) { return eval_hp(prob, x, p); },
      [&](std::span<const double> x) { return eval_finf(prob, x); }, box, hp_ps);
  const bool below = fp.back().sup_distance < kConvergenceTarget;
  std::ostringstream det;
  det << std::boolalpha << "fp decreasing " << strictly_decreasing(fp) << ", sup at p=1.01 "
      << format_double(fp.back().sup_distance) << " (< " << kConvergenceTarget << ": " << below
      << "), hp decreasing " << strictly_decreasing(hp);
  return {strictly_decreasing(fp) && below && strictly_decreasing(hp), det.str()};
}

Result gradients() {
  std::mt19937_64 rng(6006);
  double worst = 0.0;
  int checked = 0;
  while (checked < 50) {
    const std::size_t n = 2 + checked % 3;
    const int d = 2 + checked % 2;
    const Vector y = oracle::uniform_vec(n, -1.5, 1.5, rng);
    const Vector x = oracle::uniform_vec(n, -1.5, 1.5, rng);
    if (oracle::min_abs_residual(y, x, d) < 1e-2) continue;  // stay off the kinks
    const TensorProblem prob(y, d);
    for (double p : {1.5, 2.0, 3.0}) {
      const Vector fd = oracle::central_diff([&](const Vector& z) { return oracle::fp(y, z, d, p); }, x, 1e-6);
      worst = std::max(worst, oracle::rel_err(grad_fp(prob, x, p), fd));
    }
    ++checked;
  }
  return {worst <= kGradRel, "50 points x 3 exponents, max rel err " + format_double(worst)};
}

Result gallery_claims(std::size_t threads) {
  Result out;
  std::ostringstream det;
  for (const auto& e : gallery::entries()) {
    const auto rep = verify_global(e.eval, e.domain_box, kDefaultGridTolerance, e.grid_options(threads));
    const bool ok = rep.verdict == gallery::expected_verdict(e.claimed_property);
    out.pass = out.pass && ok;
    det << e.name << "=" << to_string(rep.verdict) << " ";
  }
  const double s = std::sqrt(10.0) / 4.0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = k / 99.0;
    worst = std::max(worst, std::fabs(gallery::hestenes(s * t, t * t) + 9.0 / 16.0 * t * t * t * t));
  }
  out.pass = out.pass && worst <= kPathIdentity;
  det << "path identity " << format_double(worst);
  out.detail = det.str();
  return out;
}

Result region_oracle() {
  std::mt19937_64 rng(8008);
  std::uniform_int_distribution<int> pick_n(1, 4), pick_d(1, 4);
  int agree = 0, inside = 0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = static_cast<std::size_t>(pick_n(rng));
    const int d = pick_d(rng);
    const TensorProblem prob(oracle::signed_magnitudes(n, 0.5, 1.5, rng), d);
    Vector x = oracle::uniform_vec(n, -1.4, 1.4, rng);
    for (std::size_t i = 0; i < n; ++i) x[i] *= prob.y()[i];
    const bool lib = in_region_S(prob, x), ref = oracle::in_S(prob.y(), x, d);
    agree += lib == ref;
    inside += ref;
  }
  return {agree == 10000, std::to_string(agree) + "/10000 agree (" + std::to_string(inside) + " inside S)"};
}

int sh(const std::string& cmd) {
  const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Result determinism() {
  const std::string bin = GLOBFN_CLI_PATH;
  const auto dir = std::filesystem::temp_directory_path() / "globfn_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
      {"experiment --n 10 --noisy 0,10,40 --trials 4 --iters 5000", "csv"},
      {"experiment --n 6 --noisy 0,5 --trials 3 --iters 2000", "json"},
      {"landscape --objective fp --p 1.5 --res 101", "json"},
      {"landscape --objective finf --res 81", "csv"},
      {"stationarity --remark --y 1,-2,0.5 --d 3", "json"},
      {"converge --res 61", "csv"},
      {"gallery export takagi_bivariate --res 41", "csv"},
  };
  Result out;
  int same = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::string files[2];
    for (int rep = 0; rep < 2; ++rep) {
      files[rep] = (dir / ("run" + std::to_string(k) + "_" + std::to_string(rep) + "." + runs[k].second)).string();
      std::filesystem::remove(files[rep]);
      const int code = sh(bin + " --seed 17 --out " + files[rep] + " " + runs[k].first);
      if (code == 2) out.pass = false;
    }
    const std::string a = slurp(files[0]);
    if (!a.empty() && a == slurp(files[1])) ++same;
  }
  std::filesystem::remove_all(dir);
  out.pass = out.pass && same == static_cast<int>(runs.size());
  out.detail = std::to_string(same) + "/" + std::to_string(runs.size()) + " invocations byte-identical";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance checks");
  int only = 0;
  std::size_t threads = 0;
  app.add_option("--criterion", only, "run only this criterion (1-9)")->check(CLI::Range(1, 9));
  app.add_option("--threads", threads);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Result()>> checks{
      sparse_noise, no_spurious_minima, closed_form, clarke, convergence, gradients,
      [&] { return gallery_claims(threads); }, region_oracle, determinism,
  };
  bool all = true;
  for (int k = 1; k <= 9; ++k) {
    if (only && k != only) continue;
    Result r;
    try {
      r = checks[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    all = all && r.pass;
    std::cout << "criterion " << k << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.detail << std::endl;
  }
  return all ? 0 : 1;
}
