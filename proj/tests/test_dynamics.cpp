#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stlsmooth/dynamics.hpp"
#include "stlsmooth/gradient.hpp"
#include "support/random_formula.hpp"

using namespace stlsmooth;

namespace {

ControlSequence controls(std::initializer_list<std::initializer_list<double>> rows) {
  ControlSequence u(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index t = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) u(t, j++) = v;
    ++t;
  }
  return u;
}

// Reference Euler integration of the unicycle, written out by hand.
std::vector<std::array<double, 3>> unicycle(std::array<double, 3> x, const ControlSequence& u, double dt) {
  std::vector<std::array<double, 3>> out{x};
  for (Eigen::Index t = 0; t + 1 < u.rows(); ++t) {
    x = {x[0] + dt * u(t, 0) * std::cos(x[2]), x[1] + dt * u(t, 0) * std::sin(x[2]), x[2] + dt * u(t, 1)};
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(Models, Dimensions) {
  const auto si = builtin_model("single_integrator_2d");
  EXPECT_EQ(si.n, 2u);
  EXPECT_EQ(si.m, 2u);
  EXPECT_EQ(si.p, 4u);
  const auto dd = builtin_model("differential_drive");
  EXPECT_EQ(dd.n, 3u);
  EXPECT_EQ(dd.m, 2u);
  EXPECT_EQ(dd.p, 4u);
  EXPECT_THROW(builtin_model("quadrotor"), std::invalid_argument);
  EXPECT_THROW(builtin_model("differential_drive", 0.0), std::invalid_argument);
}

TEST(Rollout, SingleIntegratorUnitSteps) {
  const auto y = rollout(builtin_model("single_integrator_2d"), Eigen::Vector2d(0, 0), controls({{1, 0}, {0, 1}}));
  ASSERT_EQ(y.length(), 2u);
  EXPECT_EQ(y.values().row(0), (Eigen::RowVector4d(0, 0, 1, 0)));
  EXPECT_EQ(y.values().row(1), (Eigen::RowVector4d(1, 0, 0, 1)));
}

TEST(Rollout, ZeroInputHoldsPosition) {
  const auto y = rollout(builtin_model("single_integrator_2d", 0.5), Eigen::Vector2d(2, -1),
                         ControlSequence::Zero(6, 2));
  for (std::size_t t = 0; t < y.length(); ++t) {
    EXPECT_EQ(y(t, 0), 2.0);
    EXPECT_EQ(y(t, 1), -1.0);
  }
}

TEST(Rollout, DifferentialDriveStraightLine) {
  const ControlSequence u = ControlSequence::Zero(6, 2).rowwise() + Eigen::RowVector2d(1, 0);
  const auto y = rollout(builtin_model("differential_drive"), Eigen::Vector3d(0, 0, 0), u);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_DOUBLE_EQ(y(t, 0), static_cast<double>(t));
    EXPECT_DOUBLE_EQ(y(t, 1), 0.0);
  }
}

TEST(Rollout, DifferentialDrivePureRotation) {
  const ControlSequence u = ControlSequence::Zero(5, 2).rowwise() + Eigen::RowVector2d(0, std::numbers::pi / 2);
  const auto model = builtin_model("differential_drive");
  const auto roll = rollout_with_sensitivities(model, Eigen::Vector3d(1, 2, 0), u);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(roll.output()(t, 0), 1.0);
    EXPECT_EQ(roll.output()(t, 1), 2.0);
  }
  EXPECT_NEAR(roll.states()(4, 2), 2 * std::numbers::pi, 1e-12);
}

TEST(Rollout, DifferentialDriveMatchesHandIntegration) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1, 1);
  ControlSequence u(8, 2);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = d(rng);
  const auto roll = rollout_with_sensitivities(builtin_model("differential_drive", 0.3), Eigen::Vector3d(0.2, -0.1, 1.0), u);
  const auto ref = unicycle({0.2, -0.1, 1.0}, u, 0.3);
  for (std::size_t t = 0; t < ref.size(); ++t) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(roll.states()(t, j), ref[t][j], 1e-14);
    EXPECT_EQ(roll.output()(t, 2), u(t, 0));
    EXPECT_EQ(roll.output()(t, 3), u(t, 1));
  }
}

TEST(Rollout, ErrorsAndDivergence) {
  const auto si = builtin_model("single_integrator_2d");
  EXPECT_THROW(rollout(si, Eigen::Vector3d(0, 0, 0), ControlSequence::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(rollout(si, Eigen::Vector2d(0, 0), ControlSequence::Zero(2, 3)), std::invalid_argument);
  ControlSequence big = ControlSequence::Zero(4, 2);
  big(0, 0) = 1e308;
  big(1, 0) = 1e308;
  try {
    rollout(si, Eigen::Vector2d(0, 0), big);
    FAIL() << "expected divergence";
  } catch (const RolloutError& e) {
    EXPECT_EQ(e.step(), 2u);
  }
}

TEST(Rollout, Deterministic) {
  std::mt19937_64 rng(3);
  ControlSequence u(10, 2);
  std::uniform_real_distribution<double> d(-2, 2);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = d(rng);
  const auto model = builtin_model("differential_drive");
  EXPECT_EQ(rollout(model, Eigen::Vector3d(0, 0, 0.3), u), rollout(model, Eigen::Vector3d(0, 0, 0.3), u));
}

TEST(Sensitivities, IntegratorFirstControlMovesLaterPositions) {
  // rho = y1 position x at t=1 -> d rho / d u0 = (1, 0) via the state, plus nothing direct.
  const auto roll = rollout_with_sensitivities(builtin_model("single_integrator_2d"), Eigen::Vector2d(0, 0),
                                               ControlSequence::Zero(2, 2));
  RowMatrix dy = RowMatrix::Zero(2, 4);
  dy(1, 0) = 1.0;
  const ControlSequence du = roll.control_gradient(dy);
  EXPECT_EQ(du(0, 0), 1.0);
  EXPECT_EQ(du(0, 1), 0.0);
  EXPECT_EQ(du.row(1).norm(), 0.0);
}

TEST(Sensitivities, LinearPredicateAffineMap) {
  // rho = sum_t (a . pos_t + b . u_t) for the integrator: d/du_s = b + a * (number of later steps).
  const Eigen::RowVector2d a(0.5, -2.0), b(1.5, 0.25);
  const std::size_t T = 4;
  const auto roll = rollout_with_sensitivities(builtin_model("single_integrator_2d"), Eigen::Vector2d(0, 0),
                                               ControlSequence::Zero(T + 1, 2));
  RowMatrix dy(T + 1, 4);
  for (std::size_t t = 0; t <= T; ++t) dy.row(t) << a, b;
  const auto du = roll.control_gradient(dy);
  for (std::size_t s = 0; s <= T; ++s) {
    const Eigen::RowVector2d expected = b + a * static_cast<double>(T - s);
    EXPECT_NEAR((du.row(s) - expected).norm(), 0.0, 1e-15);
  }
}

TEST(Sensitivities, MatchFiniteDifferences) {
  std::mt19937_64 rng(41);
  for (const std::string name : {"single_integrator_2d", "differential_drive"}) {
    const auto model = builtin_model(name, 0.5);
    for (int i = 0; i < 20; ++i) {
      gen::Options o;
      o.p = 4;
      const Formula phi = gen::random_formula(rng, o);
      const std::size_t T = horizon(phi) + 1;
      ControlSequence u(T + 1, 2);
      std::uniform_real_distribution<double> d(-1, 1);
      for (Eigen::Index j = 0; j < u.size(); ++j) u.data()[j] = d(rng);
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.n);
      x0(0) = d(rng);
      const auto cfg = SemanticsConfig::ef(2, 2);
      const auto roll = rollout_with_sensitivities(model, x0, u);
      const auto du = roll.control_gradient(eval_with_gradient(phi, roll.output(), cfg).dsignal);
      const double h = 1e-5;
      for (Eigen::Index j = 0; j < u.size(); ++j) {
        ControlSequence up = u, dn = u;
        up.data()[j] += h;
        dn.data()[j] -= h;
        const double fd = (eval(phi, rollout(model, x0, up), 0, cfg) - eval(phi, rollout(model, x0, dn), 0, cfg)) / (2 * h);
        const double g = du.data()[j];
        if (std::abs(fd) < 1e-3) {
          EXPECT_NEAR(g, fd, 1e-7);
        } else {
          EXPECT_LE(std::abs(g - fd), 1e-4 * std::abs(fd));
        }
      }
    }
  }
}
