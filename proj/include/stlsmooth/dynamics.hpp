// Discrete-time system models x_{t+1} = f(x_t, u_t), y_t = g(x_t, u_t).

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlsmooth/signal.hpp"

namespace stlsmooth {

/// u_0 ... u_T as rows.
using ControlSequence = RowMatrix;

struct SystemModel {
  using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& u)>;
  /// Writes (d/dx, d/du) of a map evaluated at (x, u).
  using Jacobians = std::function<void(const Eigen::VectorXd& x, const Eigen::VectorXd& u, Eigen::MatrixXd& dx,
                                       Eigen::MatrixXd& du)>;

  std::string name;
  std::size_t n = 0;  // state
  std::size_t m = 0;  // input
  std::size_t p = 0;  // output
  Map step;
  Map output;
  Jacobians step_jacobians;
  Jacobians output_jacobians;
};

/// single_integrator_2d: x+ = x + dt u, y = [x; u].
/// differential_drive: x = (px, py, theta), u = (v, omega), forward Euler,
/// y = [px; py; v; omega].
SystemModel builtin_model(const std::string& name, double dt = 1.0);

class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
  /// First timestep whose state or output is non-finite.
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

Signal rollout(const SystemModel& model, const Eigen::VectorXd& x0, const ControlSequence& u);

/// A rollout that keeps the per-step Jacobians for the adjoint pass.
class Rollout {
 public:
  const Signal& output() const { return output_; }
  const RowMatrix& states() const { return states_; }

  /// d J / d u from d J / d y by the backward recursion
  ///   lambda_t    = gx^T dy_t + fx^T lambda_{t+1},
  ///   dJ/du_t     = gu^T dy_t + fu^T lambda_{t+1},   lambda_{T+1} = 0.
  ControlSequence control_gradient(const RowMatrix& dy) const;

 private:
  friend Rollout rollout_with_sensitivities(const SystemModel&, const Eigen::VectorXd&, const ControlSequence&);
  Rollout(Signal output, RowMatrix states) : output_(std::move(output)), states_(std::move(states)) {}

  Signal output_;
  RowMatrix states_;
  std::vector<Eigen::MatrixXd> fx_, fu_, gx_, gu_;
};

Rollout rollout_with_sensitivities(const SystemModel& model, const Eigen::VectorXd& x0, const ControlSequence& u);

}  // namespace stlsmooth
