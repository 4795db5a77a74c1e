// Trajectory synthesis: maximize smooth robustness of the rolled-out signal
// over the control sequence.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stlsmooth/dynamics.hpp"
#include "stlsmooth/formula.hpp"
#include "stlsmooth/robustness.hpp"

namespace stlsmooth {

struct SynthesisProblem {
  SynthesisProblem(SystemModel model_, Eigen::VectorXd x0_, Formula phi_, std::size_t T_)
      : model(std::move(model_)), x0(std::move(x0_)), phi(std::move(phi_)), T(T_) {}

  SystemModel model;
  Eigen::VectorXd x0;
  Formula phi;       // negation-normal form
  std::size_t T;  // controls u_0 .. u_T
  SemanticsConfig cfg = SemanticsConfig::ef(1.0, 1.0);
  /// J = rho~ - control_weight * sum_t u_t^T u_t.
  double control_weight = 0.0;
  /// Per input dimension (lo, hi). Used for initialization, and for
  /// projection when hard_clamp is set.
  std::optional<std::vector<std::pair<double, double>>> control_bounds;
  bool hard_clamp = false;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t max_iters = 500;
  /// Stop when the infinity norm of dJ/du falls below this.
  double tolerance = 1e-6;
  /// Worker threads for restarts; 0 means one per hardware thread.
  std::size_t threads = 1;
  /// Restart 0 starts from u = 0 (or from initial_u when given); the others
  /// start from uniform random controls.
  bool zero_baseline = true;
  std::optional<ControlSequence> initial_u;

  void validate() const;
};

struct ObjectiveValue {
  double J = 0.0;
  double rho_smooth = 0.0;
  ControlSequence gradient;
};

/// J and dJ/du for one control sequence. Rollout failures propagate as
/// RolloutError.
ObjectiveValue objective(const SynthesisProblem& problem, const ControlSequence& u, OpCounter* counter = nullptr);

struct RestartSummary {
  std::size_t index = 0;
  bool failed = false;
  std::string error;
  double rho_exact = 0.0;
  double rho_smooth = 0.0;
  double J = 0.0;
  std::size_t iterations = 0;
  double wall_ms = 0.0;
};

struct SynthesisResult {
  /// False when every restart failed; the fields below are then unset.
  bool ok = false;
  std::string error;

  ControlSequence u_star;
  std::optional<Signal> y_star;
  double rho_smooth = 0.0;
  double rho_exact = 0.0;
  bool satisfied = false;  // rho_exact > 0
  std::size_t iterations = 0;
  std::vector<double> objective_trace;  // J after each accepted step, starting point first
  double wall_ms = 0.0;
  std::size_t restart_index = 0;
  ControlSequence initial_u;  // starting point of the winning restart
  std::vector<RestartSummary> restarts;
};

/// Runs `restarts` local ascents and returns the one with the highest exact
/// robustness (ties: higher J, then lower restart index). The outcome does
/// not depend on the thread count.
SynthesisResult synthesize(const SynthesisProblem& problem);

/// Solves at each k of an increasing schedule (k1 = k2 = k for EF, k for
/// LSE), warm-starting every stage after the first from the previous u_star.
/// Returns the last stage; `stages` receives all of them when non-null.
SynthesisResult k_continuation(const SynthesisProblem& problem, const std::vector<double>& k_schedule,
                               std::vector<SynthesisResult>* stages = nullptr);

}  // namespace stlsmooth
