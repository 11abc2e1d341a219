#pragma once

// Sparse-noise recovery sweeps: y ~ N(0, I_n), b = y y^T with a uniformly
// chosen set of entries replaced by N(0, noise_std^2) draws, then LS (L2) and
// LAV (L1) fits by SGD with momentum. A trial succeeds when the relative error
// (up to the global sign) is below the threshold.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "globfn/solvers.hpp"

namespace globfn {

struct ExperimentConfig {
  std::size_t n = 20;
  std::vector<std::size_t> noisy_counts{0, 5, 10, 20, 40, 70, 100, 200, 300, 400};
  double noise_std = 10.0;
  std::size_t trials = 100;
  SolverConfig solver;
  std::vector<DenseMode> modes{DenseMode::L1, DenseMode::L2};
  std::uint64_t seed = 0;
  double success_threshold = 0.1;
  std::size_t threads = 0;

  void validate() const {
    require(n >= 1, "ExperimentConfig: n must be >= 1");
    require(trials >= 1, "ExperimentConfig: trials must be >= 1");
    require(!modes.empty(), "ExperimentConfig: at least one mode is required");
    require(noise_std >= 0.0 && std::isfinite(noise_std), "ExperimentConfig: noise_std must be >= 0");
    require(success_threshold > 0.0, "ExperimentConfig: success_threshold must be > 0");
    require(std::is_sorted(noisy_counts.begin(), noisy_counts.end()),
            "ExperimentConfig: noisy_counts must be sorted");
    for (std::size_t c : noisy_counts) {
      require(c <= n * n, "ExperimentConfig: noisy count " + std::to_string(c) +
                              " exceeds n^2 = " + std::to_string(n * n));
    }
    solver.validate();
  }

  /// Desk-scale sweep: 20 trials over about ten noisy counts in [0, n^2].
  static ExperimentConfig desk(std::size_t n) {
    ExperimentConfig c;
    c.n = n;
    c.trials = 20;
    const std::size_t t = n * n;
    c.noisy_counts = {0, 5, 10, t / 20, t / 10, t * 7 / 40, t / 4, t / 2, t * 3 / 4, t};
    std::sort(c.noisy_counts.begin(), c.noisy_counts.end());
    c.noisy_counts.erase(std::unique(c.noisy_counts.begin(), c.noisy_counts.end()),
                         c.noisy_counts.end());
    while (!c.noisy_counts.empty() && c.noisy_counts.back() > t) c.noisy_counts.pop_back();
    c.solver.max_iters = n <= 20 ? 200'000 : 500'000;
    return c;
  }

  /// 100 trials, noisy counts 0..n^2 in 20 equal steps.
  static ExperimentConfig paper_scale(std::size_t n) {
    ExperimentConfig c = desk(n);
    c.trials = 100;
    c.noisy_counts.clear();
    for (std::size_t k = 0; k <= 20; ++k) c.noisy_counts.push_back(n * n * k / 20);
    c.noisy_counts.erase(std::unique(c.noisy_counts.begin(), c.noisy_counts.end()),
                         c.noisy_counts.end());
    return c;
  }
};

struct Instance {
  Vector y;
  DenseTarget target;
};

inline Instance generate_instance(std::size_t n, std::size_t num_noisy, double noise_std,
                                  std::mt19937_64& rng) {
  require(n >= 1, "generate_instance: n must be >= 1");
  require(num_noisy <= n * n, "generate_instance: num_noisy must lie in [0, n^2]");
  Vector y = gaussian_point(n, 1.0, rng);
  Vector b(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b[i * n + j] = y[i] * y[j];

  std::vector<std::size_t> cells(n * n);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  for (std::size_t k = 0; k < num_noisy; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, cells.size() - 1);
    std::swap(cells[k], cells[pick(rng)]);
  }
  cells.resize(num_noisy);
  std::sort(cells.begin(), cells.end());

  std::normal_distribution<double> noise(0.0, noise_std);
  std::vector<DenseTarget::Position> mask;
  mask.reserve(num_noisy);
  for (std::size_t c : cells) {
    b[c] = noise_std > 0.0 ? noise(rng) : 0.0;
    mask.emplace_back(c / n, c % n);
  }
  return {std::move(y), DenseTarget(n, std::move(b), std::move(mask))};
}

struct ExperimentRow {
  DenseMode mode = DenseMode::L1;
  std::size_t n = 0;
  std::size_t num_noisy = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double mean_relative_error = 0.0;
  std::vector<double> errors;  // per trial, empty after CSV import
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;

  const ExperimentRow* find(DenseMode mode, std::size_t num_noisy) const {
    for (const auto& r : rows)
      if (r.mode == mode && r.num_noisy == num_noisy) return &r;
    return nullptr;
  }
};

/// Seeds for one trial. The instance depends on (seed, noisy count, trial) so
/// both modes fit the same data; the solver start also depends on the mode.
inline std::uint64_t instance_seed(std::uint64_t seed, std::size_t num_noisy, std::size_t trial) {
  return derive_seed(seed, {0x1057ULL, num_noisy, trial});
}

inline std::uint64_t solver_seed(std::uint64_t seed, DenseMode mode, std::size_t num_noisy,
                                 std::size_t trial) {
  return derive_seed(seed, {0x5017ULL, mode == DenseMode::L1 ? 1ULL : 2ULL, num_noisy, trial});
}

/// Relative error of one (mode, noisy count, trial) work item.
inline double run_trial(const ExperimentConfig& config, DenseMode mode, std::size_t num_noisy,
                        std::size_t trial) {
  std::mt19937_64 rng(instance_seed(config.seed, num_noisy, trial));
  const Instance inst = generate_instance(config.n, num_noisy, config.noise_std, rng);
  SolverConfig sc = config.solver;
  sc.seed = solver_seed(config.seed, mode, num_noisy, trial);
  const SolveTrace trace = sgd_momentum(inst.target, mode, sc, inst.y);
  return relative_error(trace.final_point, inst.y, 2);
}

inline ExperimentResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  struct Item {
    DenseMode mode;
    std::size_t num_noisy;
    std::size_t trial;
  };
  std::vector<Item> items;
  for (DenseMode mode : config.modes)
    for (std::size_t count : config.noisy_counts)
      for (std::size_t t = 0; t < config.trials; ++t) items.push_back({mode, count, t});

  std::vector<double> errors(items.size());
  parallel_for(items.size(), config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      errors[k] = run_trial(config, items[k].mode, items[k].num_noisy, items[k].trial);
  });

  ExperimentResult result;
  std::size_t k = 0;
  for (DenseMode mode : config.modes) {
    for (std::size_t count : config.noisy_counts) {
      ExperimentRow row;
      row.mode = mode;
      row.n = config.n;
      row.num_noisy = count;
      row.trials = config.trials;
      double sum = 0.0;
      for (std::size_t t = 0; t < config.trials; ++t, ++k) {
        row.errors.push_back(errors[k]);
        sum += errors[k];
        if (errors[k] < config.success_threshold) ++row.successes;
      }
      row.rate = static_cast<double>(row.successes) / static_cast<double>(row.trials);
      row.mean_relative_error = sum / static_cast<double>(row.trials);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV persistence

inline constexpr const char* kExperimentCsvHeader =
    "mode,n,num_noisy,trials,successes,rate,mean_rel_err";

inline void write_csv(const ExperimentResult& result, std::ostream& out) {
  out << kExperimentCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << to_string(r.mode) << ',' << r.n << ',' << r.num_noisy << ',' << r.trials << ','
        << r.successes << ',' << format_double(r.rate) << ','
        << format_double(r.mean_relative_error) << '\n';
  }
}

inline void export_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  write_csv(result, out);
  if (!out) throw std::runtime_error("export_csv: write failed for " + path);
}

inline ExperimentResult read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kExperimentCsvHeader) {
    throw InvalidArgument("read_csv: missing or unexpected header");
  }
  ExperimentResult result;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    require(cols.size() == 7, "read_csv: expected 7 columns in '" + line + "'");
    ExperimentRow r;
    r.mode = parse_dense_mode(cols[0]);
    r.n = std::stoull(cols[1]);
    r.num_noisy = std::stoull(cols[2]);
    r.trials = std::stoull(cols[3]);
    r.successes = std::stoull(cols[4]);
    r.rate = std::stod(cols[5]);
    r.mean_relative_error = std::stod(cols[6]);
    result.rows.push_back(std::move(r));
  }
  return result;
}

inline ExperimentResult import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path);
  return read_csv(in);
}

}  // namespace globfn
