#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "stlsmooth/gradient.hpp"
#include "stlsmooth/robustness.hpp"
#include "stlsmooth/scenarios.hpp"
#include "stlsmooth/text.hpp"
#include "svg.hpp"

namespace stlsmooth::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// An error in a named stage (reading the spec, parsing the signal, ...).
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <typename F>
auto stage(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Threads to use: the request (0 = hardware), capped by STL_SMOOTH_THREADS.
std::size_t thread_budget(std::size_t requested) {
  std::size_t n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("STL_SMOOTH_THREADS")) {
    const auto cap = parse_double(env);
    if (cap && *cap >= 1.0) n = std::min(n, static_cast<std::size_t>(*cap));
  }
  return n;
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// eval / grad

struct FormulaArgs {
  std::string spec;
  std::string signal;
  std::string semantics = "exact";
  std::optional<double> k1, k2, k;
  std::string regions;
  std::size_t time = 0;
};

void add_formula_options(CLI::App* cmd, FormulaArgs& a) {
  cmd->add_option("--spec", a.spec, "formula text, or a file containing it")->required();
  cmd->add_option("--signal", a.signal, "signal CSV (t,y0,y1,...)")->required();
  cmd->add_option("--semantics", a.semantics, "exact, ef or lse");
  cmd->add_option("--k1", a.k1, "smooth-min sharpness (ef)");
  cmd->add_option("--k2", a.k2, "smooth-max sharpness (ef)");
  cmd->add_option("--k", a.k, "log-sum-exp sharpness (lse)");
  cmd->add_option("--regions", a.regions, "JSON file of named boxes");
}

SemanticsConfig semantics_from(const FormulaArgs& a) {
  switch (semantics_kind_from_string(a.semantics)) {
    case SemanticsConfig::Kind::Exact:
      return SemanticsConfig::exact();
    case SemanticsConfig::Kind::EF:
      return SemanticsConfig::ef(a.k1.value_or(1.0), a.k2.value_or(1.0));
    case SemanticsConfig::Kind::LSE:
      return SemanticsConfig::lse(a.k.value_or(1.0));
    default:
      return SemanticsConfig::agm();
  }
}

struct Loaded {
  Formula phi;
  Signal y;
  SemanticsConfig cfg;
};

Loaded load_formula_inputs(const FormulaArgs& a) {
  const SemanticsConfig cfg = stage("semantics", [&] {
    auto c = semantics_from(a);
    c.validate();
    return c;
  });
  const Signal y = stage("signal", [&] { return read_signal_csv(a.signal); });
  const RegionTable regions =
      a.regions.empty() ? RegionTable{} : stage("regions", [&] { return regions_from_json_text(read_file(a.regions)); });
  const std::string text = stage("spec", [&] { return fs::is_regular_file(a.spec) ? read_file(a.spec) : a.spec; });
  Formula phi = stage("spec", [&] { return parse(text, regions, y.dim()); });
  // Smooth semantics are defined on negation-normal form.
  if (cfg.kind != SemanticsConfig::Kind::Exact) phi = to_nnf(phi);
  return {std::move(phi), y, cfg};
}

int cmd_eval(const FormulaArgs& a, bool as_json) {
  const auto start = Clock::now();
  auto in = load_formula_inputs(a);
  OpCounter counter;
  const double value = stage("evaluation", [&] { return eval(in.phi, in.y, a.time, in.cfg, &counter); });
  if (as_json) {
    json report = {{"command", "eval"},
                   {"spec", to_string(in.phi)},
                   {"signal", a.signal},
                   {"semantics", to_string(in.cfg.kind)},
                   {"k1", in.cfg.k1},
                   {"k2", in.cfg.k2},
                   {"k", in.cfg.k},
                   {"t", a.time},
                   {"robustness", value},
                   {"satisfied", value > 0.0},
                   {"op_count", counter.scalar_args},
                   {"wall_ms", ms_since(start)}};
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << format_double(value) << "\n";
  }
  return value > 0.0 ? 0 : 1;
}

int cmd_grad(const FormulaArgs& a, const std::string& out, bool check, bool as_json) {
  const auto start = Clock::now();
  auto in = load_formula_inputs(a);
  const auto g = stage("gradient", [&] { return eval_with_gradient(in.phi, in.y, in.cfg); });
  if (!out.empty()) stage("output", [&] { write_gradient_csv(out, g.dsignal); return 0; });
  std::optional<double> fd_error;
  if (check) {
    const RowMatrix fd = finite_difference_gradient(in.phi, in.y, in.cfg, 1e-5);
    fd_error = (fd - g.dsignal).lpNorm<Eigen::Infinity>();
  }
  if (as_json) {
    json report = {{"command", "grad"},
                   {"spec", to_string(in.phi)},
                   {"semantics", to_string(in.cfg.kind)},
                   {"robustness", g.value},
                   {"gradient_csv", out},
                   {"wall_ms", ms_since(start)}};
    if (fd_error) report["finite_difference_max_abs_error"] = *fd_error;
    if (out.empty()) {
      json rows = json::array();
      for (Eigen::Index t = 0; t < g.dsignal.rows(); ++t) {
        rows.push_back(std::vector<double>(g.dsignal.row(t).begin(), g.dsignal.row(t).end()));
      }
      report["gradient"] = rows;
    }
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << format_double(g.value) << "\n";
    if (out.empty()) write_matrix_csv(std::cout, g.dsignal, "d_y");
    if (fd_error) std::cout << "finite-difference max abs error: " << format_double(*fd_error) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth / bench / scale

struct ScenarioArgs {
  std::string scenario;
  std::string config;
  std::optional<double> k1, k2;
  std::optional<std::size_t> restarts, max_iters;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
};

void add_scenario_options(CLI::App* cmd, ScenarioArgs& a) {
  auto* group = cmd->add_option_group("source");
  group->add_option("--scenario", a.scenario, "builtin scenario name");
  group->add_option("--config", a.config, "scenario JSON file");
  group->require_option(1);
  cmd->add_option("--k1", a.k1, "override k1");
  cmd->add_option("--k2", a.k2, "override k2");
  cmd->add_option("--restarts", a.restarts, "override restart count");
  cmd->add_option("--seed", a.seed, "override seed");
  cmd->add_option("--max-iters", a.max_iters, "override iteration cap");
  cmd->add_option("--threads", a.threads, "worker threads (0 = all; capped by STL_SMOOTH_THREADS)");
}

ScenarioConfig resolve_scenario(const ScenarioArgs& a) {
  return stage("config", [&] {
    ScenarioConfig cfg = a.scenario.empty() ? load_scenario(a.config) : builtin_scenario(a.scenario);
    if (a.k1) cfg.k1 = *a.k1;
    if (a.k2) cfg.k2 = *a.k2;
    if (a.restarts) cfg.restarts = *a.restarts;
    if (a.seed) cfg.seed = *a.seed;
    if (a.max_iters) cfg.max_iters = *a.max_iters;
    validate_scenario(cfg);
    return cfg;
  });
}

bool inside(const Box& box, const Signal& y, std::size_t t) {
  for (const auto& [dim, range] : box.bounds) {
    const double v = y(t, dim);
    if (!(v > range.first && v < range.second)) return false;
  }
  return true;
}

// Timesteps spent inside any non-obstacle region.
std::size_t dwell_steps(const RegionTable& regions, const Signal& y) {
  std::size_t count = 0;
  for (std::size_t t = 0; t < y.length(); ++t) {
    for (const auto& [name, box] : regions) {
      if (name.rfind("obs", 0) == 0 || name.rfind("Obs", 0) == 0) continue;
      if (inside(box, y, t)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

int cmd_synth(const ScenarioArgs& a, const std::string& out_dir, const std::vector<std::string>& argv,
              bool as_json) {
  const auto start = Clock::now();
  const ScenarioConfig cfg = resolve_scenario(a);
  std::mt19937_64 rng(cfg.seed);
  auto problem = stage("config", [&] {
    const Eigen::VectorXd x0 = sample_x0(cfg, rng);
    return make_problem(cfg, x0);
  });
  problem.threads = thread_budget(a.threads);
  const auto result = synthesize(problem);

  const fs::path dir(out_dir);
  stage("output", [&] { return fs::create_directories(dir) || fs::is_directory(dir); });
  json artifacts = json::object();
  json payload;
  if (result.ok) {
    write_signal_csv((dir / "trajectory.csv").string(), *result.y_star);
    write_matrix_csv((dir / "controls.csv").string(), result.u_star, "u");
    write_file(dir / "plot.svg", render_svg(effective_regions(cfg), {*result.y_star}));
    artifacts = {{"trajectory", (dir / "trajectory.csv").string()},
                 {"controls", (dir / "controls.csv").string()},
                 {"plot", (dir / "plot.svg").string()}};
    json restarts = json::array();
    for (const auto& r : result.restarts) {
      restarts.push_back({{"index", r.index},
                          {"failed", r.failed},
                          {"rho_exact", r.rho_exact},
                          {"rho_smooth", r.rho_smooth},
                          {"J", r.J},
                          {"iterations", r.iterations},
                          {"wall_ms", r.wall_ms}});
    }
    payload = {{"ok", true},
               {"rho_exact", result.rho_exact},
               {"rho_smooth", result.rho_smooth},
               {"satisfied", result.satisfied},
               {"iterations", result.iterations},
               {"restart_index", result.restart_index},
               {"objective_trace", result.objective_trace},
               {"x0", std::vector<double>(problem.x0.data(), problem.x0.data() + problem.x0.size())},
               {"dwell_steps", dwell_steps(cfg.regions, *result.y_star)},
               {"restarts", restarts}};
  } else {
    payload = {{"ok", false}, {"satisfied", false}, {"error", result.error}};
  }
  json report = {{"command", argv},
                 {"config", json::parse(scenario_to_json_text(cfg))},
                 {"result", payload},
                 {"wall_ms", ms_since(start)},
                 {"synthesis_wall_ms", result.wall_ms},
                 {"artifacts", artifacts}};
  write_file(dir / "report.json", report.dump(2) + "\n");

  if (as_json) {
    std::cout << report.dump(2) << "\n";
  } else if (result.ok) {
    std::cout << "scenario " << cfg.name << ": rho_exact " << format_double(result.rho_exact) << ", rho_smooth "
              << format_double(result.rho_smooth) << ", " << (result.satisfied ? "satisfied" : "not satisfied")
              << " (restart " << result.restart_index << ", " << result.iterations << " iterations, "
              << format_double(result.wall_ms) << " ms)\n"
              << "wrote " << dir.string() << "/{trajectory.csv,controls.csv,plot.svg,report.json}\n";
  } else {
    std::cout << "synthesis failed: " << result.error << "\n";
  }
  return result.satisfied ? 0 : 1;
}

void print_aggregate(std::ostream& out, const BenchSummary& s) {
  out << "runs  satisfied  rho_mean  rho_std  rho_median  t_mean_s  t_std_s\n";
  out << s.records.size() << "  " << s.satisfied << "  " << format_double(s.rho_mean) << "  "
      << format_double(s.rho_std) << "  " << format_double(s.rho_median) << "  " << format_double(s.wall_mean_s)
      << "  " << format_double(s.wall_std_s) << "\n";
}

int cmd_bench(const ScenarioArgs& a, const BenchOptions& base, const std::string& out, bool as_json) {
  const ScenarioConfig cfg = resolve_scenario(a);
  BenchOptions options = base;
  options.threads = thread_budget(a.threads);
  const auto summary = stage("bench", [&] { return run_bench(cfg, options); });
  stage("output", [&] {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    write_bench_csv(f, summary.records);
    return 0;
  });
  if (as_json) {
    json rows = json::array();
    for (const auto& r : summary.records) {
      rows.push_back({{"trial", r.trial},
                      {"seed", r.seed},
                      {"x0", r.x0},
                      {"rho_exact", r.rho_exact},
                      {"rho_smooth", r.rho_smooth},
                      {"satisfied", r.satisfied},
                      {"iters", r.iters},
                      {"wall_ms", r.wall_ms},
                      {"failed", r.failed}});
    }
    json report = {{"command", "bench"},
                   {"scenario", cfg.name},
                   {"csv", out},
                   {"records", rows},
                   {"aggregate",
                    {{"runs", summary.records.size()},
                     {"satisfied", summary.satisfied},
                     {"rho_mean", summary.rho_mean},
                     {"rho_std", summary.rho_std},
                     {"rho_median", summary.rho_median},
                     {"t_mean_s", summary.wall_mean_s},
                     {"t_std_s", summary.wall_std_s}}}};
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << "scenario " << cfg.name << ", wrote " << out << "\n";
    print_aggregate(std::cout, summary);
  }
  return 0;
}

std::vector<std::size_t> parse_list(const std::string& text, const std::string& flag) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) {
      throw StageError("arguments", flag + " expects comma-separated nonnegative integers, got '" + text + "'");
    }
    out.push_back(value);
  }
  return out;
}

int cmd_scale(const ScenarioArgs& a, const std::string& n_list, const std::string& p_list, const std::string& out,
              bool as_json) {
  const auto N = parse_list(n_list, "--n");
  const auto P = parse_list(p_list, "--p");
  if (N.empty() && P.empty()) throw StageError("arguments", "give --n and/or --p");
  ScenarioArgs src = a;
  if (src.scenario.empty() && src.config.empty()) src.scenario = "charging";
  ScenarioConfig base = resolve_scenario(src);
  if (!a.restarts) base.restarts = 1;
  const auto records = stage("scale", [&] { return run_scaling(base, N, P); });
  stage("output", [&] {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    write_scaling_csv(f, records);
    return 0;
  });
  if (as_json) {
    json rows = json::array();
    for (const auto& r : records) {
      rows.push_back({{"sweep", r.sweep},
                      {"value", r.value},
                      {"wall_ms", r.wall_ms},
                      {"op_count", r.op_count},
                      {"iters", r.iterations},
                      {"ms_per_iter", r.ms_per_iter}});
    }
    std::cout << json{{"command", "scale"}, {"csv", out}, {"records", rows}}.dump(2) << "\n";
  } else {
    std::cout << "wrote " << out << "\n";
    write_scaling_csv(std::cout, records);
  }
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Smooth robustness for signal temporal logic."};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "print the machine-readable report instead of the summary");

  FormulaArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "robustness of a signal (exit 0 if > 0, 1 if <= 0, 2 on error)");
  add_formula_options(eval_cmd, eval_args);
  eval_cmd->add_option("--time", eval_args.time, "evaluation time index");

  FormulaArgs grad_args;
  std::string grad_out;
  bool grad_check = false;
  auto* grad_cmd = app.add_subcommand("grad", "smooth robustness and its gradient with respect to the signal");
  add_formula_options(grad_cmd, grad_args);
  grad_args.semantics = "ef";
  grad_cmd->add_option("--out", grad_out, "gradient CSV (t,d_y0,...); printed when omitted");
  grad_cmd->add_flag("--check", grad_check, "compare against central finite differences");

  ScenarioArgs synth_args;
  std::string synth_out = "synth_out";
  auto* synth_cmd = app.add_subcommand("synth", "synthesize controls for a scenario (exit 0 iff satisfied)");
  add_scenario_options(synth_cmd, synth_args);
  synth_cmd->add_option("--out", synth_out, "output directory");

  ScenarioArgs bench_args;
  BenchOptions bench_options;
  std::string bench_out = "bench.csv";
  auto* bench_cmd = app.add_subcommand("bench", "repeat synthesis over sampled initial states");
  add_scenario_options(bench_cmd, bench_args);
  bench_cmd->add_option("--trials", bench_options.trials, "number of trials");
  bench_cmd->add_option("--budget-s", bench_options.budget_s, "time budget in seconds");
  bench_cmd->add_flag("--at-least", bench_options.at_least,
                      "run until both the trial count and the budget are reached");
  bench_cmd->add_option("--out", bench_out, "per-trial CSV");

  ScenarioArgs scale_args;
  std::string n_list, p_list, scale_out = "scaling.csv";
  auto* scale_cmd = app.add_subcommand("scale", "charging-station scaling sweep over N and/or P");
  auto* source = scale_cmd->add_option_group("source");
  source->add_option("--scenario", scale_args.scenario, "base scenario (default charging)");
  source->add_option("--config", scale_args.config, "base scenario JSON file");
  source->require_option(0, 1);
  scale_cmd->add_option("--k1", scale_args.k1, "override k1");
  scale_cmd->add_option("--k2", scale_args.k2, "override k2");
  scale_cmd->add_option("--restarts", scale_args.restarts, "restarts per synthesis (default 1)");
  scale_cmd->add_option("--seed", scale_args.seed, "override seed");
  scale_cmd->add_option("--max-iters", scale_args.max_iters, "override iteration cap");
  scale_cmd->add_option("--n", n_list, "horizons, e.g. 10,20,30");
  scale_cmd->add_option("--p", p_list, "station counts, e.g. 1,2,3");
  scale_cmd->add_option("--out", scale_out, "scaling CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::vector<std::string> echo(argv, argv + argc);
  try {
    if (*eval_cmd) return cmd_eval(eval_args, as_json);
    if (*grad_cmd) return cmd_grad(grad_args, grad_out, grad_check, as_json);
    if (*synth_cmd) return cmd_synth(synth_args, synth_out, echo, as_json);
    if (*bench_cmd) return cmd_bench(bench_args, bench_options, bench_out, as_json);
    if (*scale_cmd) return cmd_scale(scale_args, n_list, p_list, scale_out, as_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace stlsmooth::cli
