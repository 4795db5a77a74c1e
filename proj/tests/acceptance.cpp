// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stlsmooth/gradient.hpp"
#include "stlsmooth/scenarios.hpp"
#include "stlsmooth/smooth_ops.hpp"
#include "support/random_formula.hpp"

using namespace stlsmooth;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> d(-10, 10);
  std::vector<double> a(m);
  for (auto& x : a) x = d(rng);
  return a;
}

// Relative error with an absolute floor for near-zero reference entries.
bool gradient_close(double got, double fd) {
  return std::abs(fd) < 1e-3 ? std::abs(got - fd) <= 1e-7 : std::abs(got - fd) <= 1e-4 * std::abs(fd);
}

Outcome min_bound() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::size_t violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_vector(rng, std::uniform_int_distribution<std::size_t>(1, 8)(rng));
    for (double k : {0.5, 1.0, 2.0, 10.0}) {
      const double gap = *std::min_element(a.begin(), a.end()) - smooth_min(a, k);
      const double bound = std::log(static_cast<double>(a.size())) / k;
      worst = std::max(worst, gap - bound);
      if (gap < 0 || gap > bound + 1e-12) ++violations;
    }
  }
  const double t = seconds_since(start);
  return {violations == 0 && t < 5.0,
          std::to_string(violations) + " violations, max(gap - bound) = " + fmt(worst) + ", " + fmt(t) + " s"};
}

Outcome max_bound() {
  std::mt19937_64 rng(102);
  std::size_t violations = 0;
  for (int i = 0; i < 10000; ++i) {
    auto a = random_vector(rng, std::uniform_int_distribution<std::size_t>(2, 8)(rng));
    std::sort(a.begin(), a.end(), std::greater<>());
    for (double k : {0.5, 1.0, 2.0, 10.0}) {
      const double gap = a.front() - smooth_max(a, k);
      if (gap < 0 || gap > max_error_bound(a, k) + 1e-12) ++violations;
    }
  }
  std::size_t not_tight = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = random_vector(rng, 2);
    std::sort(a.begin(), a.end(), std::greater<>());
    if (std::abs((a.front() - smooth_max(a, 0.0)) - max_error_bound(a, 0.0)) > 1e-12) ++not_tight;
  }
  return {violations == 0 && not_tight == 0,
          std::to_string(violations) + " violations, " + std::to_string(not_tight) + " non-tight k2=0 pairs"};
}

Outcome soundness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(103);
  std::vector<bool> kinds(8, false);
  std::size_t above = 0, unsound = 0;
  for (int i = 0; i < 1000; ++i) {
    const Formula phi = gen::random_formula(rng);
    gen::collect_kinds(phi, kinds);
    const Signal y = gen::random_signal(rng, horizon(phi) + 1, 2);
    const double exact = eval(phi, y, 0, SemanticsConfig::exact());
    for (double k : {0.5, 2.0, 10.0}) {
      const double ef = eval(phi, y, 0, SemanticsConfig::ef(k, k));
      if (ef > exact + 1e-9) ++above;
      if (ef > 0 && !(exact > 0)) ++unsound;
    }
  }
  const auto covered = static_cast<std::size_t>(std::count(kinds.begin(), kinds.end(), true));
  const double t = seconds_since(start);
  return {above == 0 && unsound == 0 && covered == 8 && t < 30.0,
          std::to_string(above) + " over-approximations, " + std::to_string(unsound) + " unsound, " +
              std::to_string(covered) + "/8 node kinds, " + fmt(t) + " s"};
}

Outcome convergence() {
  std::mt19937_64 rng(104);
  std::size_t non_monotone = 0, far = 0;
  double worst_final = 0.0, worst_rise = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Formula phi = gen::random_formula(rng);
    const Signal y = gen::random_signal(rng, horizon(phi) + 1, 2);
    const double exact = eval(phi, y, 0, SemanticsConfig::exact());
    double previous = INFINITY;
    bool monotone = true;
    for (double k : {1.0, 10.0, 100.0, 1000.0}) {
      const double gap = std::abs(exact - eval(phi, y, 0, SemanticsConfig::ef(k, k)));
      if (gap > previous + 1e-9) {
        monotone = false;
        worst_rise = std::max(worst_rise, gap - previous);
      }
      previous = gap;
    }
    worst_final = std::max(worst_final, previous);
    if (!monotone) ++non_monotone;
    if (previous > 0.05) ++far;
  }
  return {non_monotone == 0 && far == 0,
          std::to_string(non_monotone) + " non-monotone cases (largest rise " + fmt(worst_rise) + "), " +
              std::to_string(far) + " cases above 0.05 at k=1000 (worst " + fmt(worst_final) + ")"};
}

Outcome mean_at_zero() {
  std::mt19937_64 rng(105);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_vector(rng, std::uniform_int_distribution<std::size_t>(1, 8)(rng));
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    worst = std::max(worst, std::abs(smooth_max(a, 0.0) - mean));
  }
  return {worst <= 1e-12, "max |smooth_max(a,0) - mean| = " + fmt(worst)};
}

Outcome gradients() {
  std::mt19937_64 rng(106);
  std::size_t bad_entries = 0, entries = 0;
  for (int i = 0; i < 100; ++i) {
    const Formula phi = gen::random_formula(rng);
    const Signal y = gen::random_signal(rng, horizon(phi) + 1, 2);
    const double k = std::uniform_real_distribution<double>(0.5, 10.0)(rng);
    const auto cfg = SemanticsConfig::ef(k, k);
    const RowMatrix g = eval_with_gradient(phi, y, cfg).dsignal;
    const RowMatrix fd = finite_difference_gradient(phi, y, cfg, 1e-5);
    for (Eigen::Index j = 0; j < g.size(); ++j, ++entries) {
      if (!gradient_close(g.data()[j], fd.data()[j])) ++bad_entries;
    }
  }
  double worst_sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_vector(rng, std::uniform_int_distribution<std::size_t>(1, 8)(rng));
    const double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
    for (const auto& w : {grad_smooth_min(a, k), grad_smooth_max(a, k)}) {
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
    }
  }
  std::size_t non_finite = 0;
  for (int i = 0; i < 100; ++i) {
    const Formula phi = gen::random_formula(rng);
    const double c = std::uniform_real_distribution<double>(-100, 100)(rng);
    const Signal y(RowMatrix::Constant(static_cast<Eigen::Index>(horizon(phi) + 1), 2, c));
    const double k = std::array{0.01, 1.0, 1e3, 1e5}[static_cast<std::size_t>(i % 4)];
    const auto g = eval_with_gradient(phi, y, SemanticsConfig::ef(k, k));
    if (!std::isfinite(g.value) || !g.dsignal.allFinite()) ++non_finite;
  }
  return {bad_entries == 0 && worst_sum <= 1e-10 && non_finite == 0,
          std::to_string(bad_entries) + "/" + std::to_string(entries) + " entries off, max |sum w - 1| = " +
              fmt(worst_sum) + ", " + std::to_string(non_finite) + " non-finite on tied inputs"};
}

Outcome adjoint() {
  std::mt19937_64 rng(107);
  std::size_t bad = 0, entries = 0;
  for (const std::string name : {"single_integrator_2d", "differential_drive"}) {
    for (int i = 0; i < 50; ++i) {
      gen::Options o;
      o.p = 4;
      const Formula phi = gen::random_formula(rng, o);
      const std::size_t T = horizon(phi) + 1;
      std::uniform_real_distribution<double> d(-1, 1);
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(name == "differential_drive" ? 3 : 2);
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0(j) = d(rng);
      SynthesisProblem p(builtin_model(name, 0.5), x0, phi, T);
      p.cfg = SemanticsConfig::ef(2, 2);
      p.control_weight = 0.01;
      ControlSequence u(static_cast<Eigen::Index>(T + 1), 2);
      for (Eigen::Index j = 0; j < u.size(); ++j) u.data()[j] = d(rng);
      const auto g = objective(p, u).gradient;
      for (Eigen::Index j = 0; j < u.size(); ++j, ++entries) {
        ControlSequence up = u, dn = u;
        up.data()[j] += 1e-5;
        dn.data()[j] -= 1e-5;
        const double fd = (objective(p, up).J - objective(p, dn).J) / 2e-5;
        if (!gradient_close(g.data()[j], fd)) ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(bad) + "/" + std::to_string(entries) + " control-gradient entries off"};
}

Outcome two_target() {
  auto cfg = builtin_scenario("two_target");
  cfg.restarts = 20;
  const auto problem = make_problem(cfg, Eigen::Map<const Eigen::VectorXd>(cfg.x0->data(), 2));
  const auto r = synthesize(problem);
  std::size_t ok = 0;
  double slowest = 0.0;
  for (const auto& s : r.restarts) {
    if (!s.failed && s.rho_exact > 0) ++ok;
    slowest = std::max(slowest, s.wall_ms);
  }
  return {r.ok && 2 * ok >= r.restarts.size() && r.rho_exact > 0 && slowest < 60000.0,
          std::to_string(ok) + "/20 restarts satisfied, best rho " + fmt(r.rho_exact) + ", slowest restart " +
              fmt(slowest) + " ms"};
}

Outcome tunnel() {
  auto run = [](double k) {
    auto cfg = builtin_scenario("tunnel");
    cfg.restarts = 10;
    cfg.k1 = cfg.k2 = k;
    const auto r = synthesize(make_problem(cfg, Eigen::Map<const Eigen::VectorXd>(cfg.x0->data(), 2)));
    return static_cast<std::size_t>(
        std::count_if(r.restarts.begin(), r.restarts.end(), [](const auto& s) { return !s.failed && s.rho_exact > 0; }));
  };
  const std::size_t sharp = run(10.0), soft = run(0.5);
  return {sharp >= 1 && soft < sharp,
          "k=10: " + std::to_string(sharp) + "/10 satisfied, k=0.5: " + std::to_string(soft) + "/10"};
}

Outcome lse_unsound() {
  // Two near-tied disjuncts, both slightly violated.
  const Formula phi = Formula::disj({Formula::pred(Predicate({1.0, 0.0}, 0.0)), Formula::pred(Predicate({0.0, 1.0}, 0.0))});
  const Signal y = Signal::from_rows({{-0.1, -0.1}});
  const double lse = eval(phi, y, 0, SemanticsConfig::lse(1.0));
  const double exact = eval(phi, y, 0, SemanticsConfig::exact());
  return {lse > 0 && exact < 0, "LSE " + fmt(lse) + ", exact " + fmt(exact)};
}

Outcome scaling() {
  const double n10 = static_cast<double>(objective_op_count(charging_scenario(10, 1)));
  const double n30 = static_cast<double>(objective_op_count(charging_scenario(30, 1)));
  const double ratio = n30 / n10;
  const double p1 = static_cast<double>(objective_op_count(charging_scenario(29, 1)));
  bool p_linear = true;
  for (std::size_t P = 2; P <= 10; ++P) {
    p_linear &= static_cast<double>(objective_op_count(charging_scenario(29, P))) <= static_cast<double>(P) * p1;
  }
  auto base = builtin_scenario("charging");
  base.restarts = 1;
  const auto records = run_scaling(base, {10, 30}, {});
  const double time_ratio = records[1].ms_per_iter / records[0].ms_per_iter;
  return {ratio >= 2.5 && ratio <= 3.5 && p_linear,
          "op ratio N=30/N=10 " + fmt(ratio) + (p_linear ? ", P sweep at most linear" : ", P sweep superlinear") +
              ", ms/iter ratio " + fmt(time_ratio) + (time_ratio < 9.0 ? " (< 9)" : " (>= 9, informational)")};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "stlsmooth_acceptance_det";
  fs::remove_all(dir);
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string("'") + STL_SMOOTH_CLI + "' synth --scenario two_target --seed 7 --out '" +
                            (dir / out).string() + "' >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  run("a");
  run("b");
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  };
  const std::string a = slurp(dir / "a" / "trajectory.csv"), b = slurp(dir / "b" / "trajectory.csv");
  fs::remove_all(dir);
  return {!a.empty() && a == b, a.empty() ? "no trajectory written" : (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"smooth min error bound", min_bound},
      {"smooth max error bound", max_bound},
      {"soundness of smooth robustness", soundness},
      {"convergence as k grows", convergence},
      {"smooth max at k2=0 is the mean", mean_at_zero},
      {"gradient correctness", gradients},
      {"end-to-end adjoint", adjoint},
      {"two_target synthesis", two_target},
      {"tunnel sharpness tradeoff", tunnel},
      {"LSE unsoundness exhibit", lse_unsound},
      {"charging scaling", scaling},
      {"synth determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu  %-32s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
