#include "stlsmooth/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <thread>

#include "stlsmooth/gradient.hpp"

namespace stlsmooth {

void SynthesisProblem::validate() const {
  if (static_cast<std::size_t>(x0.size()) != model.n) {
    throw std::invalid_argument("x0 has length " + std::to_string(x0.size()) + ", model '" + model.name +
                                "' expects " + std::to_string(model.n));
  }
  if (!is_nnf(phi)) throw std::invalid_argument("synthesis needs a formula in negation-normal form");
  if (T < horizon(phi)) {
    throw std::invalid_argument("T=" + std::to_string(T) + " is shorter than the formula horizon " +
                                std::to_string(horizon(phi)));
  }
  if (required_dim(phi) > model.p) throw std::invalid_argument("formula references outputs the model lacks");
  if (cfg.kind != SemanticsConfig::Kind::EF && cfg.kind != SemanticsConfig::Kind::LSE) {
    throw std::invalid_argument("synthesis needs a smooth semantics (ef or lse)");
  }
  cfg.validate();
  if (!(control_weight >= 0.0)) throw std::invalid_argument("control_weight must be nonnegative");
  if (control_bounds) {
    if (control_bounds->size() != model.m) throw std::invalid_argument("control_bounds needs one pair per input");
    for (const auto& [lo, hi] : *control_bounds) {
      if (!(lo < hi)) throw std::invalid_argument("control bound lo must be below hi");
    }
  }
  if (hard_clamp && !control_bounds) throw std::invalid_argument("hard_clamp needs control_bounds");
  if (restarts == 0) throw std::invalid_argument("restarts must be at least 1");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (initial_u && (initial_u->rows() != static_cast<Eigen::Index>(T + 1) ||
                    initial_u->cols() != static_cast<Eigen::Index>(model.m))) {
    throw std::invalid_argument("initial_u has the wrong shape");
  }
}

ObjectiveValue objective(const SynthesisProblem& problem, const ControlSequence& u, OpCounter* counter) {
  auto roll = rollout_with_sensitivities(problem.model, problem.x0, u);
  auto grad = eval_with_gradient(problem.phi, roll.output(), problem.cfg, counter);
  ObjectiveValue out;
  out.rho_smooth = grad.value;
  out.J = grad.value - problem.control_weight * u.squaredNorm();
  out.gradient = roll.control_gradient(grad.dsignal) - 2.0 * problem.control_weight * u;
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

struct Ascent {
  bool failed = false;
  std::string error;
  ControlSequence initial;
  ControlSequence u;
  double J = -std::numeric_limits<double>::infinity();
  double rho_smooth = 0.0;
  double rho_exact = 0.0;
  std::vector<double> trace;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
};

double dot(const ControlSequence& a, const ControlSequence& b) { return a.cwiseProduct(b).sum(); }

void project(const SynthesisProblem& problem, ControlSequence& u) {
  if (!problem.hard_clamp) return;
  const auto& bounds = *problem.control_bounds;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    u.col(j) = u.col(j).cwiseMax(bounds[j].first).cwiseMin(bounds[j].second);
  }
}

ControlSequence initial_controls(const SynthesisProblem& problem, std::size_t index) {
  const auto rows = static_cast<Eigen::Index>(problem.T + 1);
  const auto cols = static_cast<Eigen::Index>(problem.model.m);
  if (index == 0 && problem.initial_u) return *problem.initial_u;
  if (index == 0 && problem.zero_baseline) return ControlSequence::Zero(rows, cols);
  std::seed_seq seq{static_cast<std::uint32_t>(problem.seed), static_cast<std::uint32_t>(problem.seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  ControlSequence u(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double lo = -1.0;
      double hi = 1.0;
      if (problem.control_bounds) std::tie(lo, hi) = (*problem.control_bounds)[j];
      std::uniform_real_distribution<double> dist(lo, hi);
      u(t, j) = dist(rng);
    }
  }
  return u;
}

/// L-BFGS on -J with a backtracking line search that only accepts steps
/// satisfying the Armijo condition, so J never decreases.
Ascent local_ascent(const SynthesisProblem& problem, ControlSequence u0) {
  constexpr std::size_t kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 50;

  const auto start = Clock::now();
  Ascent out;
  project(problem, u0);
  out.initial = u0;
  ObjectiveValue cur;
  try {
    cur = objective(problem, u0);
  } catch (const RolloutError& e) {
    out.failed = true;
    out.error = e.what();
    out.wall_ms = elapsed_ms(start);
    return out;
  }
  if (!std::isfinite(cur.J) || !cur.gradient.allFinite()) {
    out.failed = true;
    out.error = "objective is not finite at the initial point";
    out.wall_ms = elapsed_ms(start);
    return out;
  }

  ControlSequence u = std::move(u0);
  out.trace.push_back(cur.J);
  std::deque<std::pair<ControlSequence, ControlSequence>> memory;  // (s, y) for -J
  std::vector<double> alpha(kMemory);
  bool first_step = true;

  std::size_t iter = 0;
  for (; iter < problem.max_iters; ++iter) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < problem.tolerance) break;

    // Two-loop recursion on the gradient of -J; the result is an ascent direction.
    ControlSequence q = -cur.gradient;
    for (std::size_t i = memory.size(); i-- > 0;) {
      const auto& [s, y] = memory[i];
      alpha[i] = dot(s, q) / dot(y, s);
      q -= alpha[i] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= dot(s, y) / dot(y, y);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, y] = memory[i];
      const double beta = dot(y, q) / dot(y, s);
      q += (alpha[i] - beta) * s;
    }
    ControlSequence dir = -q;
    if (!(dot(dir, cur.gradient) > 0.0) || !dir.allFinite()) {
      memory.clear();
      dir = cur.gradient;
    }

    double step = 1.0;
    if (first_step || memory.empty()) step = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());
    bool accepted = false;
    ControlSequence u_new;
    ObjectiveValue next;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      u_new = u + step * dir;
      project(problem, u_new);
      const double predicted = dot(cur.gradient, u_new - u);
      if (!(predicted > 0.0)) continue;
      try {
        next = objective(problem, u_new);
      } catch (const RolloutError&) {
        continue;
      }
      if (std::isfinite(next.J) && next.gradient.allFinite() && next.J >= cur.J + kArmijo * predicted) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    first_step = false;

    ControlSequence s = u_new - u;
    ControlSequence y = cur.gradient - next.gradient;  // change in grad(-J)
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      if (memory.size() == kMemory) memory.pop_front();
      memory.emplace_back(std::move(s), std::move(y));
    }
    u = std::move(u_new);
    cur = std::move(next);
    out.trace.push_back(cur.J);
  }

  out.iterations = iter;
  out.J = cur.J;
  out.rho_smooth = cur.rho_smooth;
  out.u = std::move(u);
  out.rho_exact = eval(problem.phi, rollout(problem.model, problem.x0, out.u), 0, SemanticsConfig::exact());
  out.wall_ms = elapsed_ms(start);
  return out;
}

// a beats b: higher exact robustness, then higher J, then lower index.
bool better(const Ascent& a, std::size_t ia, const Ascent& b, std::size_t ib) {
  if (a.failed != b.failed) return !a.failed;
  if (a.rho_exact != b.rho_exact) return a.rho_exact > b.rho_exact;
  if (a.J != b.J) return a.J > b.J;
  return ia < ib;
}

}  // namespace

SynthesisResult synthesize(const SynthesisProblem& problem) {
  problem.validate();
  const auto start = Clock::now();

  std::vector<Ascent> runs(problem.restarts);
  std::atomic<std::size_t> next_index{0};
  auto worker = [&] {
    for (std::size_t i = next_index++; i < runs.size(); i = next_index++) {
      runs[i] = local_ascent(problem, initial_controls(problem, i));
    }
  };
  std::size_t threads = problem.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : problem.threads;
  threads = std::min(threads, runs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }

  SynthesisResult result;
  std::size_t best = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    result.restarts.push_back({i, r.failed, r.error, r.rho_exact, r.rho_smooth, r.J, r.iterations, r.wall_ms});
    if (better(r, i, runs[best], best)) best = i;
  }
  result.wall_ms = elapsed_ms(start);
  if (runs[best].failed) {
    result.ok = false;
    result.error = "all " + std::to_string(runs.size()) + " restarts failed; first error: " + runs[best].error;
    return result;
  }
  auto& win = runs[best];
  result.ok = true;
  result.restart_index = best;
  result.u_star = std::move(win.u);
  result.y_star = rollout(problem.model, problem.x0, result.u_star);
  result.rho_smooth = win.rho_smooth;
  result.rho_exact = win.rho_exact;
  result.satisfied = win.rho_exact > 0.0;
  result.iterations = win.iterations;
  result.objective_trace = std::move(win.trace);
  result.initial_u = std::move(win.initial);
  return result;
}

SynthesisResult k_continuation(const SynthesisProblem& problem, const std::vector<double>& k_schedule,
                               std::vector<SynthesisResult>* stages) {
  if (k_schedule.empty()) throw std::invalid_argument("k schedule is empty");
  for (std::size_t i = 0; i < k_schedule.size(); ++i) {
    if (!(k_schedule[i] > 0.0)) throw std::invalid_argument("k schedule entries must be positive");
    if (i > 0 && !(k_schedule[i] > k_schedule[i - 1])) throw std::invalid_argument("k schedule must increase");
  }
  auto with_k = [](SynthesisProblem p, double k) {
    if (p.cfg.kind == SemanticsConfig::Kind::LSE) {
      p.cfg.k = k;
    } else {
      p.cfg.k1 = k;
      p.cfg.k2 = k;
    }
    return p;
  };

  SynthesisResult current = synthesize(with_k(problem, k_schedule.front()));
  if (stages) stages->push_back(current);
  for (std::size_t i = 1; i < k_schedule.size(); ++i) {
    if (!current.ok) break;
    auto stage = with_k(problem, k_schedule[i]);
    stage.restarts = 1;
    stage.initial_u = current.u_star;
    current = synthesize(stage);
    if (stages) stages->push_back(current);
  }
  return current;
}

}  // namespace stlsmooth
