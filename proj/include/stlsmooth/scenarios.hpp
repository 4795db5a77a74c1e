// Benchmark scenarios: built-in planning problems, JSON config files, and
// the bench / scaling harnesses.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/optimizer.hpp"

namespace stlsmooth {

using Bounds = std::vector<std::pair<double, double>>;

struct ScenarioConfig {
  std::string name;
  std::string model = "single_integrator_2d";
  double dt = 1.0;
  std::size_t T = 10;
  std::string semantics = "ef";  // ef or lse
  double k1 = 1.0;
  double k2 = 1.0;
  double control_weight = 0.01;
  /// Initialization box for random restarts; projection when hard_clamp.
  std::optional<Bounds> control_bounds;
  bool hard_clamp = false;
  RegionTable regions;
  std::string spec;
  std::optional<std::vector<double>> x0;  // full state
  std::optional<Bounds> x0_box;           // position dimensions
  std::optional<std::pair<double, double>> theta0_range;
  std::size_t restarts = 10;
  bool zero_baseline = true;
  std::uint64_t seed = 0;
  double obstacle_inflation = 0.0;
  std::size_t max_iters = 500;
  double tolerance = 1e-6;

  bool operator==(const ScenarioConfig&) const;
};

/// two_target, tunnel, charging, table2_diffdrive.
ScenarioConfig builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

/// Charging-station scenario with horizon N and P stations. Stations fill
/// three clusters (capacity 4, 3, 3) in order; each cluster's visit window
/// scales with N / 30.
ScenarioConfig charging_scenario(std::size_t N = 30, std::size_t P = 10);

/// Regions after obstacle inflation (regions named obs*).
RegionTable effective_regions(const ScenarioConfig& cfg);
/// Parsed, NNF-normalized spec. Throws when the spec does not parse or the
/// horizon exceeds T.
Formula scenario_formula(const ScenarioConfig& cfg);
void validate_scenario(const ScenarioConfig& cfg);

/// Draws an initial state from x0 / x0_box / theta0_range.
Eigen::VectorXd sample_x0(const ScenarioConfig& cfg, std::mt19937_64& rng);
SynthesisProblem make_problem(const ScenarioConfig& cfg, const Eigen::VectorXd& x0);

/// JSON config I/O. Errors name the offending key.
ScenarioConfig scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);
/// `{name: {dim: [lo, hi]}}`, the same layout as a config's regions key.
RegionTable regions_from_json_text(const std::string& text);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

struct BenchRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> x0;
  double rho_exact = 0.0;
  double rho_smooth = 0.0;
  bool satisfied = false;
  std::size_t iters = 0;
  double wall_ms = 0.0;
  bool failed = false;
};

struct BenchSummary {
  std::vector<BenchRecord> records;  // ordered by trial
  double rho_mean = 0.0;
  double rho_std = 0.0;  // sample standard deviation
  double rho_median = 0.0;
  double wall_mean_s = 0.0;
  double wall_std_s = 0.0;
  std::size_t satisfied = 0;
};

struct BenchOptions {
  std::size_t trials = 20;
  double budget_s = 100.0;
  /// false: stop at `trials` or when the budget runs out, whichever first.
  /// true: keep going until both are reached ("whichever gives more runs").
  bool at_least = false;
  std::size_t threads = 1;
};

BenchSummary run_bench(const ScenarioConfig& cfg, const BenchOptions& options);
/// Fills the aggregate fields from records.
void summarize(BenchSummary& summary);

/// `trial,seed,x0_0,...,rho_exact,rho_smooth,satisfied,iters,wall_ms`.
void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);
std::vector<BenchRecord> read_bench_csv(std::istream& in);

struct ScalingRecord {
  std::string sweep;  // "N" or "P"
  std::size_t value = 0;
  double wall_ms = 0.0;
  std::uint64_t op_count = 0;  // scalar min/max arguments per objective evaluation
  std::size_t iterations = 0;
  double ms_per_iter = 0.0;
};

/// N sweep uses one charging station; P sweep fixes N = 29. Tuning fields
/// (k1, k2, restarts, seed, max_iters, ...) come from `base`.
std::vector<ScalingRecord> run_scaling(const ScenarioConfig& base, const std::vector<std::size_t>& N_values,
                                       const std::vector<std::size_t>& P_values);

/// Scalar min/max arguments for one objective evaluation at u = 0.
std::uint64_t objective_op_count(const ScenarioConfig& cfg);

/// `sweep,value,wall_ms,op_count,iters,ms_per_iter`.
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRecord>& records);
std::vector<ScalingRecord> read_scaling_csv(std::istream& in);

}  // namespace stlsmooth
