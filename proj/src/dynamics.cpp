#include "stlsmooth/dynamics.hpp"

#include <cmath>

namespace stlsmooth {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SystemModel single_integrator(double dt) {
  SystemModel model;
  model.name = "single_integrator_2d";
  model.n = 2;
  model.m = 2;
  model.p = 4;
  model.step = [dt](const VectorXd& x, const VectorXd& u) -> VectorXd { return x + dt * u; };
  model.output = [](const VectorXd& x, const VectorXd& u) -> VectorXd {
    VectorXd y(4);
    y << x, u;
    return y;
  };
  model.step_jacobians = [dt](const VectorXd&, const VectorXd&, MatrixXd& fx, MatrixXd& fu) {
    fx = MatrixXd::Identity(2, 2);
    fu = dt * MatrixXd::Identity(2, 2);
  };
  model.output_jacobians = [](const VectorXd&, const VectorXd&, MatrixXd& gx, MatrixXd& gu) {
    gx = MatrixXd::Zero(4, 2);
    gx.topRows(2).setIdentity();
    gu = MatrixXd::Zero(4, 2);
    gu.bottomRows(2).setIdentity();
  };
  return model;
}

SystemModel differential_drive(double dt) {
  SystemModel model;
  model.name = "differential_drive";
  model.n = 3;
  model.m = 2;
  model.p = 4;
  model.step = [dt](const VectorXd& x, const VectorXd& u) -> VectorXd {
    VectorXd next(3);
    next << x(0) + dt * u(0) * std::cos(x(2)), x(1) + dt * u(0) * std::sin(x(2)), x(2) + dt * u(1);
    return next;
  };
  model.output = [](const VectorXd& x, const VectorXd& u) -> VectorXd {
    VectorXd y(4);
    y << x(0), x(1), u(0), u(1);
    return y;
  };
  model.step_jacobians = [dt](const VectorXd& x, const VectorXd& u, MatrixXd& fx, MatrixXd& fu) {
    const double c = std::cos(x(2));
    const double s = std::sin(x(2));
    fx = MatrixXd::Identity(3, 3);
    fx(0, 2) = -dt * u(0) * s;
    fx(1, 2) = dt * u(0) * c;
    fu = MatrixXd::Zero(3, 2);
    fu(0, 0) = dt * c;
    fu(1, 0) = dt * s;
    fu(2, 1) = dt;
  };
  model.output_jacobians = [](const VectorXd&, const VectorXd&, MatrixXd& gx, MatrixXd& gu) {
    gx = MatrixXd::Zero(4, 3);
    gx(0, 0) = 1.0;
    gx(1, 1) = 1.0;
    gu = MatrixXd::Zero(4, 2);
    gu(2, 0) = 1.0;
    gu(3, 1) = 1.0;
  };
  return model;
}

void check_inputs(const SystemModel& model, const VectorXd& x0, const ControlSequence& u) {
  if (static_cast<std::size_t>(x0.size()) != model.n) {
    throw std::invalid_argument("initial state has length " + std::to_string(x0.size()) + ", model expects " +
                                std::to_string(model.n));
  }
  if (u.rows() == 0) throw std::invalid_argument("control sequence is empty");
  if (static_cast<std::size_t>(u.cols()) != model.m) {
    throw std::invalid_argument("control sequence has " + std::to_string(u.cols()) + " columns, model expects " +
                                std::to_string(model.m));
  }
  if (!x0.allFinite()) throw std::invalid_argument("initial state is not finite");
  if (!u.allFinite()) throw std::invalid_argument("control sequence is not finite");
}

// Runs the recursion; when `on_step` is set it is called with (t, x_t, u_t).
template <typename OnStep>
std::pair<RowMatrix, RowMatrix> simulate(const SystemModel& model, const VectorXd& x0, const ControlSequence& u,
                                         OnStep&& on_step) {
  check_inputs(model, x0, u);
  const auto steps = u.rows();
  RowMatrix ys(steps, model.p);
  RowMatrix xs(steps, model.n);
  VectorXd x = x0;
  for (Eigen::Index t = 0; t < steps; ++t) {
    const VectorXd ut = u.row(t).transpose();
    xs.row(t) = x.transpose();
    VectorXd yt = model.output(x, ut);
    if (static_cast<std::size_t>(yt.size()) != model.p) throw std::logic_error("model output has the wrong size");
    if (!yt.allFinite()) {
      throw RolloutError("non-finite output at timestep " + std::to_string(t), static_cast<std::size_t>(t));
    }
    ys.row(t) = yt.transpose();
    on_step(t, x, ut);
    if (t + 1 < steps) {
      x = model.step(x, ut);
      if (!x.allFinite()) {
        throw RolloutError("non-finite state at timestep " + std::to_string(t + 1), static_cast<std::size_t>(t + 1));
      }
    }
  }
  return {std::move(ys), std::move(xs)};
}

}  // namespace

SystemModel builtin_model(const std::string& name, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (name == "single_integrator_2d") return single_integrator(dt);
  if (name == "differential_drive") return differential_drive(dt);
  throw std::invalid_argument("unknown model '" + name + "' (expected single_integrator_2d or differential_drive)");
}

Signal rollout(const SystemModel& model, const VectorXd& x0, const ControlSequence& u) {
  auto [ys, xs] = simulate(model, x0, u, [](Eigen::Index, const VectorXd&, const VectorXd&) {});
  return Signal(std::move(ys));
}

Rollout rollout_with_sensitivities(const SystemModel& model, const VectorXd& x0, const ControlSequence& u) {
  if (!model.step_jacobians || !model.output_jacobians) {
    throw std::invalid_argument("model '" + model.name + "' does not provide Jacobians");
  }
  std::vector<MatrixXd> fx, fu, gx, gu;
  const auto steps = static_cast<std::size_t>(u.rows());
  fx.reserve(steps);
  fu.reserve(steps);
  gx.reserve(steps);
  gu.reserve(steps);
  auto [ys, xs] = simulate(model, x0, u, [&](Eigen::Index, const VectorXd& x, const VectorXd& ut) {
    MatrixXd a, b;
    model.output_jacobians(x, ut, a, b);
    gx.push_back(std::move(a));
    gu.push_back(std::move(b));
    model.step_jacobians(x, ut, a, b);
    fx.push_back(std::move(a));
    fu.push_back(std::move(b));
  });
  Rollout out(Signal(std::move(ys)), std::move(xs));
  out.fx_ = std::move(fx);
  out.fu_ = std::move(fu);
  out.gx_ = std::move(gx);
  out.gu_ = std::move(gu);
  return out;
}

ControlSequence Rollout::control_gradient(const RowMatrix& dy) const {
  const auto steps = static_cast<Eigen::Index>(output_.length());
  if (dy.rows() != steps || dy.cols() != static_cast<Eigen::Index>(output_.dim())) {
    throw std::invalid_argument("output adjoint has the wrong shape");
  }
  const Eigen::Index m = fu_.front().cols();
  const Eigen::Index n = fx_.front().rows();
  ControlSequence du(steps, m);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);  // lambda_{t+1}
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const Eigen::VectorXd dyt = dy.row(t).transpose();
    du.row(t) = (gu_[t].transpose() * dyt + fu_[t].transpose() * lambda).transpose();
    lambda = gx_[t].transpose() * dyt + fx_[t].transpose() * lambda;
  }
  return du;
}

}  // namespace stlsmooth
