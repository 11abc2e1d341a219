#pragma once

// Command-line front end. Every subcommand parses flags, prints its resolved
// configuration, then forwards to the library. Exit codes: 0 success,
// 1 verification failure, 2 usage error.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "globfn/experiments.hpp"
#include "globfn/gallery.hpp"
#include "globfn/io.hpp"
#include "globfn/landscape.hpp"
#include "globfn/stationarity.hpp"

namespace globfn::cli {

enum ExitCode : int { kOk = 0, kVerificationFailed = 1, kUsage = 2 };

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string join(std::span<const double> v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

template <class T>
std::string join_int(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  std::size_t threads = 0;
};

inline void print_config(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& kv) {
  os << "resolved config:\n";
  for (const auto& [k, v] : kv) os << "  " << k << " = " << v << '\n';
}

inline GridBox make_box(std::size_t n, const std::vector<double>& box, std::size_t res) {
  if (box.size() == 2) return GridBox::cube(n, box[0], box[1], res);
  if (box.size() == 2 * n) {
    return GridBox(Vector(box.begin(), box.begin() + static_cast<long>(n)),
                   Vector(box.begin() + static_cast<long>(n), box.end()), res);
  }
  throw UsageError("--box expects lo,hi or n lower corners followed by n upper corners");
}

// -- experiment ---------------------------------------------------------------

struct ExperimentArgs {
  std::size_t n = 20;
  std::vector<std::string> modes{"l1", "l2"};
  std::vector<std::size_t> noisy;
  std::size_t trials = 0;
  double noise_std = 10.0;
  double lr = 0.001;
  double momentum = 0.9;
  std::size_t iters = 0;
  double batch = 0.1;
  double init_std = 1.0;
  double threshold = 0.1;
  double early_stop = 0.0;
  bool paper_scale = false;
  CLI::Option* noisy_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
};

inline ExperimentConfig resolve(const ExperimentArgs& a, const Globals& g) {
  ExperimentConfig c = a.paper_scale ? ExperimentConfig::paper_scale(a.n) : ExperimentConfig::desk(a.n);
  if (a.noisy_opt->count() > 0) {
    c.noisy_counts = a.noisy;
    std::sort(c.noisy_counts.begin(), c.noisy_counts.end());
  }
  if (a.trials_opt->count() > 0) c.trials = a.trials;
  if (a.iters_opt->count() > 0) c.solver.max_iters = a.iters;
  c.noise_std = a.noise_std;
  c.solver.learning_rate = a.lr;
  c.solver.momentum = a.momentum;
  c.solver.batch_fraction = a.batch;
  c.solver.init_std = a.init_std;
  c.solver.early_stop_rel_err = a.early_stop;
  c.success_threshold = a.threshold;
  c.modes.clear();
  for (const auto& m : a.modes) c.modes.push_back(parse_dense_mode(m));
  c.seed = g.seed;
  c.threads = g.threads;
  return c;
}

inline int run_experiment(const ExperimentArgs& a, const Globals& g, std::ostream& out) {
  const ExperimentConfig c = resolve(a, g);
  c.validate();
  std::string modes;
  for (auto m : c.modes) modes += (modes.empty() ? "" : ",") + to_string(m);
  print_config(out, {{"n", std::to_string(c.n)},
                     {"modes", modes},
                     {"noisy", join_int(c.noisy_counts)},
                     {"trials", std::to_string(c.trials)},
                     {"noise_std", format_double(c.noise_std)},
                     {"lr", format_double(c.solver.learning_rate)},
                     {"momentum", format_double(c.solver.momentum)},
                     {"iters", std::to_string(c.solver.max_iters)},
                     {"batch", format_double(c.solver.batch_fraction)},
                     {"init_std", format_double(c.solver.init_std)},
                     {"threshold", format_double(c.success_threshold)},
                     {"early_stop", format_double(c.solver.early_stop_rel_err)},
                     {"seed", std::to_string(c.seed)},
                     {"threads", std::to_string(c.threads)},
                     {"out", g.out}});
  const ExperimentResult result = run_sweep(c);
  out << "mode  num_noisy  successes/trials  rate  mean_rel_err\n";
  for (const auto& r : result.rows) {
    out << to_string(r.mode) << "  " << r.num_noisy << "  " << r.successes << "/" << r.trials
        << "  " << format_double(r.rate) << "  " << format_double(r.mean_relative_error) << '\n';
  }
  if (!g.out.empty()) {
    if (has_extension(g.out, ".json")) {
      write_json(to_json(result), g.out);
    } else {
      export_csv(result, g.out);
    }
    out << "wrote " << g.out << '\n';
  }
  return kOk;
}

// -- landscape ----------------------------------------------------------------

struct LandscapeArgs {
  std::string objective = "f1";
  std::vector<double> y{1.0, -0.75};
  int d = 2;
  double p = 0.0;
  std::vector<double> box{-2.0, 2.0};
  std::size_t res = 201;
  double tol = kDefaultGridTolerance;
  std::string mode = "auto";
};

inline std::function<double(std::span<const double>)> tensor_objective(const std::string& name,
                                                                       const TensorProblem& prob,
                                                                       double p) {
  if (name == "f1") return [&prob](std::span<const double> x) { return eval_f1(prob, x); };
  if (name == "finf") return [&prob](std::span<const double> x) { return eval_finf(prob, x); };
  if (name == "fp") return [&prob, p](std::span<const double> x) { return eval_fp(prob, x, p); };
  if (name == "hp") return [&prob, p](std::span<const double> x) { return eval_hp(prob, x, p); };
  throw UsageError("--objective must be one of f1, fp, finf, hp (got '" + name + "')");
}

inline void write_minima_csv(const GridReport& rep, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  const std::size_t n = rep.grid_local_minima.empty() ? 0 : rep.grid_local_minima[0].point.size();
  for (std::size_t k = 0; k < n; ++k) f << 'x' << (k + 1) << ',';
  f << "value\n";
  for (const auto& m : rep.grid_local_minima) {
    for (double v : m.point) f << format_double(v) << ',';
    f << format_double(m.value) << '\n';
  }
}

inline int run_landscape(LandscapeArgs a, const Globals& g, std::ostream& out) {
  if (a.p == 0.0) a.p = a.objective == "hp" ? 64.0 : 2.0;
  if (a.mode == "auto") a.mode = a.objective == "finf" ? "weak" : "global";
  if (a.mode != "global" && a.mode != "weak" && a.mode != "region-s") {
    throw UsageError("--mode must be auto, global, weak or region-s");
  }
  const TensorProblem prob(a.y, a.d);
  const GridBox box = make_box(prob.dim(), a.box, a.res);
  const auto f = tensor_objective(a.objective, prob, a.p);
  print_config(out, {{"objective", a.objective},
                     {"y", join(a.y)},
                     {"d", std::to_string(a.d)},
                     {"p", (a.objective == "fp" || a.objective == "hp") ? format_double(a.p) : "-"},
                     {"box", join(a.box)},
                     {"res", std::to_string(a.res)},
                     {"tol", format_double(a.tol)},
                     {"mode", a.mode},
                     {"threads", std::to_string(g.threads)},
                     {"out", g.out}});

  GridOptions opts;
  opts.threads = g.threads;
  GridReport rep;
  if (a.mode == "region-s") {
    if (a.objective != "f1") throw UsageError("--mode region-s applies to --objective f1 only");
    rep = verify_on_region_S(prob, box, a.tol, g.threads);
  } else if (a.mode == "weak") {
    rep = verify_weakly_global(f, box, a.tol, opts);
  } else {
    rep = verify_global(f, box, a.tol, opts);
  }

  out << "verdict (desk-scale grid evidence): " << to_string(rep.verdict) << '\n';
  out << "global_value: " << format_double(rep.global_value) << '\n';
  out << "grid_local_minima: " << rep.grid_local_minima.size() << '\n';
  out << "plateaus: " << rep.plateaus.size() << '\n';
  const std::size_t shown = std::min<std::size_t>(rep.grid_local_minima.size(), 10);
  for (std::size_t k = 0; k < shown; ++k) {
    const auto& m = rep.grid_local_minima[k];
    out << "  (" << join(m.point) << ") -> " << format_double(m.value) << '\n';
  }
  if (!g.out.empty()) {
    if (has_extension(g.out, ".csv")) {
      write_minima_csv(rep, g.out);
    } else {
      write_json(to_json(rep), g.out);
    }
    out << "wrote " << g.out << '\n';
  }
  const bool ok = a.mode == "weak" ? rep.verdict != Verdict::SpuriousFound
                                   : rep.verdict == Verdict::Global;
  return ok ? kOk : kVerificationFailed;
}

// -- stationarity ---------------------------------------------------------------

struct StationarityArgs {
  std::vector<double> y{1.0, 1.0};
  int d = 2;
  std::vector<double> x;
  bool remark = false;
  double tol = kStationarityTolerance;
};

inline int run_stationarity(const StationarityArgs& a, const Globals& g, std::ostream& out) {
  const TensorProblem prob(a.y, a.d);
  if (a.remark == !a.x.empty()) throw UsageError("give exactly one of --x or --remark");
  const Vector x = a.remark ? make_remark_point(prob, g.seed) : Vector(a.x);
  prob.check_point(x);
  print_config(out, {{"y", join(a.y)},
                     {"d", std::to_string(a.d)},
                     {"x", join(x)},
                     {"tol", format_double(a.tol)},
                     {"seed", std::to_string(g.seed)},
                     {"out", g.out}});

  const StationarityReport rep = is_clarke_stationary(prob, x, a.tol);
  out << std::boolalpha;
  out << "stationary: " << rep.stationary << '\n';
  out << "zero_pattern_ok: " << rep.lemma1_zero_pattern_ok << '\n';
  out << "ratio_bound_ok: " << rep.lemma1_ratio_bound_ok << '\n';
  out << "max_ratio_product: " << format_double(rep.max_ratio_product) << '\n';
  for (std::size_t i = 0; i < rep.per_coordinate_interval.size(); ++i) {
    const auto& iv = rep.per_coordinate_interval[i];
    out << "  interval[" << (i + 1) << "] = [" << format_double(iv.lo) << ", "
        << format_double(iv.hi) << "]\n";
  }

  Json doc{{"report", to_json(rep)}, {"x", x}};
  bool ok = !rep.stationary || (rep.lemma1_zero_pattern_ok && rep.lemma1_ratio_bound_ok);
  const bool y_nonzero = std::none_of(a.y.begin(), a.y.end(), [](double v) { return v == 0.0; });
  const bool x_nonzero = std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; });
  if (y_nonzero && x_nonzero) {
    const Staircase stairs = build_staircase(prob, x);
    out << "staircase jumps:";
    for (const auto& j : stairs.jumps()) out << ' ' << format_double(j.point);
    out << '\n';
    doc["staircase"] = to_json(stairs);
    if (rep.stationary) {
      const bool sep = verify_root_jump_separation(prob, x, a.tol);
      out << "root_jump_separation: " << sep << '\n';
      doc["root_jump_separation"] = sep;
      ok = ok && sep;
    }
  }
  if (!g.out.empty()) {
    write_json(doc, g.out);
    out << "wrote " << g.out << '\n';
  }
  return ok ? kOk : kVerificationFailed;
}

// -- converge -------------------------------------------------------------------

struct ConvergeArgs {
  std::vector<double> y{1.0, -0.75};
  int d = 2;
  std::vector<double> box{-2.0, 2.0};
  std::size_t res = 201;
  std::string family = "fp";
  std::vector<double> p;
  double threshold = -1.0;
};

inline int run_converge(ConvergeArgs a, const Globals& g, std::ostream& out) {
  if (a.family != "fp" && a.family != "hp") throw UsageError("--family must be fp or hp");
  if (a.p.empty()) {
    a.p = a.family == "fp" ? std::vector<double>{2, 1.5, 1.25, 1.1, 1.01}
                           : std::vector<double>{8, 32, 128};
  }
  const TensorProblem prob(a.y, a.d);
  const GridBox box = make_box(prob.dim(), a.box, a.res);
  print_config(out, {{"family", a.family},
                     {"target", a.family == "fp" ? "f1" : "finf"},
                     {"y", join(a.y)},
                     {"d", std::to_string(a.d)},
                     {"box", join(a.box)},
                     {"res", std::to_string(a.res)},
                     {"p", join(a.p)},
                     {"threshold", a.threshold < 0 ? "-" : format_double(a.threshold)},
                     {"out", g.out}});
  GridOptions opts;
  opts.threads = g.threads;
  std::vector<ConvergenceRow> rows;
  if (a.family == "fp") {
    rows = check_compact_convergence(
        [&](double p, std::span<const double> x) { return eval_fp(prob, x, p); },
        [&](std::span<const double> x) { return eval_f1(prob, x); }, box, a.p, opts);
  } else {
    rows = check_compact_convergence(
        [&](double p, std::span<const double> x) { return eval_hp(prob, x, p); },
        [&](std::span<const double> x) { return eval_finf(prob, x); }, box, a.p, opts);
  }
  out << "p  sup_distance\n";
  for (const auto& r : rows) out << format_double(r.p) << "  " << format_double(r.sup_distance) << '\n';
  const bool decreasing = strictly_decreasing(rows);
  const bool below = a.threshold < 0 || rows.back().sup_distance < a.threshold;
  out << std::boolalpha << "strictly_decreasing: " << decreasing << '\n';
  if (a.threshold >= 0) out << "final_below_threshold: " << below << '\n';
  if (!g.out.empty()) {
    if (has_extension(g.out, ".json")) {
      write_json(to_json(rows), g.out);
    } else {
      std::ofstream f(g.out, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open " + g.out);
      f << "p,sup_distance\n";
      for (const auto& r : rows) f << format_double(r.p) << ',' << format_double(r.sup_distance) << '\n';
    }
    out << "wrote " << g.out << '\n';
  }
  return decreasing && below ? kOk : kVerificationFailed;
}

// -- gallery --------------------------------------------------------------------

struct GalleryArgs {
  std::string name;
  std::vector<double> at;
  std::size_t res = 0;
};

inline gallery::GalleryEntry lookup(const std::string& name) {
  auto e = gallery::find(name);
  if (!e) throw UsageError("unknown gallery function '" + name + "'");
  return *e;
}

inline int run_gallery_list(std::ostream& out) {
  print_config(out, {});
  for (const auto& e : gallery::entries()) {
    out << e.name << "  arity=" << e.arity << "  claim=" << gallery::to_string(e.claimed_property)
        << '\n';
  }
  return kOk;
}

inline int run_gallery_eval(const GalleryArgs& a, std::ostream& out) {
  const auto e = lookup(a.name);
  if (a.at.size() != static_cast<std::size_t>(e.arity)) {
    throw UsageError("--at needs " + std::to_string(e.arity) + " coordinate(s) for " + e.name);
  }
  print_config(out, {{"name", e.name}, {"at", join(a.at)}});
  out << "value: " << format_double(e.eval(a.at)) << '\n';
  return kOk;
}

inline int run_gallery_export(const GalleryArgs& a, const Globals& g, std::ostream& out) {
  const auto e = lookup(a.name);
  if (g.out.empty()) throw UsageError("gallery export requires --out <file.csv>");
  const GridBox box(e.domain_box.lower(), e.domain_box.upper(),
                    a.res != 0 ? a.res : e.domain_box.resolution());
  print_config(out, {{"name", e.name},
                     {"box", join(box.lower()) + " .. " + join(box.upper())},
                     {"res", std::to_string(box.resolution())},
                     {"out", g.out}});
  const GridValues grid = sample_grid(e.eval, box, e.grid_options(g.threads));
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + g.out);
  f << (e.arity == 1 ? "x1,value\n" : "x1,x2,value\n");
  for (std::size_t i = 0; i < box.size(); ++i) {
    for (double v : box.point(i)) f << format_double(v) << ',';
    f << format_double(grid.values()[i]) << '\n';
  }
  out << "wrote " << box.size() << " rows to " << g.out << '\n';
  return kOk;
}

inline int run_gallery_verify(const GalleryArgs& a, const Globals& g, std::ostream& out) {
  const auto e = lookup(a.name);
  print_config(out, {{"name", e.name},
                     {"claim", gallery::to_string(e.claimed_property)},
                     {"res", std::to_string(e.domain_box.resolution())},
                     {"window", e.window ? "true" : "false"}});
  const GridReport rep =
      verify_global(e.eval, e.domain_box, kDefaultGridTolerance, e.grid_options(g.threads));
  const Verdict expected = gallery::expected_verdict(e.claimed_property);
  out << "verdict (desk-scale grid evidence): " << to_string(rep.verdict) << '\n';
  out << "expected: " << to_string(expected) << '\n';
  if (!g.out.empty()) {
    write_json(to_json(rep), g.out);
    out << "wrote " << g.out << '\n';
  }
  return rep.verdict == expected ? kOk : kVerificationFailed;
}

// Values from a flat key=value file fill options the command line left unset.
// Keys are long flag names without dashes, looked up on the subcommand first.
inline void apply_config_file(const std::string& path, CLI::App& leaf, CLI::App& root) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(path);
  } catch (const CLI::FileError& e) {
    throw UsageError(e.what());
  }
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    const std::string key = "--" + item.fullname();
    CLI::Option* opt = leaf.get_option_no_throw(key);
    if (opt == nullptr) opt = root.get_option_no_throw(key);
    if (opt == nullptr || key == "--config") throw UsageError("unknown key '" + item.fullname() + "' in " + path);
    if (opt->count() > 0) continue;
    for (const auto& v : item.inputs) opt->add_result(v);
    opt->run_callback();
  }
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"globfn: nonsmooth rank-one tensor objectives and landscape checks", "globfn"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--out", g.out, "output file (.csv or .json)");
  app.add_option("--threads", g.threads, "worker thread cap (0 = hardware)")->capture_default_str();
  std::string config_path;
  app.add_option("--config", config_path, "flat key=value file; flags given on the command line win");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "sparse-noise LS vs LAV recovery sweep");
  exp->add_option("--n", ea.n, "dimension")->capture_default_str();
  exp->add_option("--modes", ea.modes, "subset of l1,l2")->delimiter(',');
  ea.noisy_opt = exp->add_option("--noisy", ea.noisy, "noisy entry counts")->delimiter(',');
  ea.trials_opt = exp->add_option("--trials", ea.trials, "trials per cell");
  exp->add_option("--noise-std", ea.noise_std)->capture_default_str();
  exp->add_option("--lr", ea.lr)->capture_default_str();
  exp->add_option("--momentum", ea.momentum)->capture_default_str();
  ea.iters_opt = exp->add_option("--iters", ea.iters, "SGD iterations per solve");
  exp->add_option("--batch", ea.batch, "fraction of n^2 terms per step")->capture_default_str();
  exp->add_option("--init-std", ea.init_std)->capture_default_str();
  exp->add_option("--threshold", ea.threshold, "success threshold")->capture_default_str();
  exp->add_option("--early-stop", ea.early_stop, "stop below this relative error (0 = off)");
  exp->add_flag("--paper-scale", ea.paper_scale, "100 trials over 0..n^2 in 20 steps");

  LandscapeArgs la;
  auto* land = app.add_subcommand("landscape", "grid verification of an objective's minima");
  land->add_option("--objective", la.objective, "f1, fp, finf or hp")->capture_default_str();
  land->add_option("--y", la.y)->delimiter(',');
  land->add_option("--d", la.d)->capture_default_str();
  land->add_option("--p", la.p, "exponent for fp/hp (default 2 / 64)");
  land->add_option("--box", la.box, "lo,hi or per-axis corners")->delimiter(',');
  land->add_option("--res", la.res)->capture_default_str();
  land->add_option("--tol", la.tol)->capture_default_str();
  land->add_option("--mode", la.mode, "auto, global, weak or region-s")->capture_default_str();

  StationarityArgs sa;
  auto* stat = app.add_subcommand("stationarity", "Clarke stationarity report for f1");
  stat->add_option("--y", sa.y)->delimiter(',');
  stat->add_option("--d", sa.d)->capture_default_str();
  stat->add_option("--x", sa.x)->delimiter(',');
  stat->add_flag("--remark", sa.remark, "use a constructed stationary non-minimum (seeded)");
  stat->add_option("--tol", sa.tol)->capture_default_str();

  ConvergeArgs ca;
  auto* conv = app.add_subcommand("converge", "sup-grid distance of f_p -> f1 or h_p -> f_inf");
  conv->add_option("--y", ca.y)->delimiter(',');
  conv->add_option("--d", ca.d)->capture_default_str();
  conv->add_option("--box", ca.box)->delimiter(',');
  conv->add_option("--res", ca.res)->capture_default_str();
  conv->add_option("--family", ca.family, "fp or hp")->capture_default_str();
  conv->add_option("--p", ca.p, "exponent schedule")->delimiter(',');
  conv->add_option("--threshold", ca.threshold, "required final sup distance");

  GalleryArgs gaa;
  auto* gal = app.add_subcommand("gallery", "named example functions");
  gal->require_subcommand(1);
  auto* gal_list = gal->add_subcommand("list", "list entries");
  auto* gal_eval = gal->add_subcommand("eval", "evaluate at a point");
  gal_eval->add_option("name", gaa.name)->required();
  gal_eval->add_option("--at", gaa.at)->delimiter(',')->required();
  auto* gal_export = gal->add_subcommand("export", "CSV surface grid");
  gal_export->add_option("name", gaa.name)->required();
  gal_export->add_option("--res", gaa.res, "points per axis (default: entry box)");
  auto* gal_verify = gal->add_subcommand("verify", "grid-check the claimed property");
  gal_verify->add_option("name", gaa.name)->required();
  for (auto* sc : {gal_list, gal_eval, gal_export, gal_verify}) sc->fallthrough();
  for (auto* sc : {exp, land, stat, conv, gal}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (!config_path.empty()) {
      CLI::App* leaf = &app;
      while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
      apply_config_file(config_path, *leaf, app);
    }
    if (*exp) return run_experiment(ea, g, out);
    if (*land) return run_landscape(la, g, out);
    if (*stat) return run_stationarity(sa, g, out);
    if (*conv) return run_converge(ca, g, out);
    if (*gal_list) return run_gallery_list(out);
    if (*gal_eval) return run_gallery_eval(gaa, out);
    if (*gal_export) return run_gallery_export(gaa, g, out);
    if (*gal_verify) return run_gallery_verify(gaa, g, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace globfn::cli
