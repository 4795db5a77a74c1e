// Analytic gradients of smooth robustness with respect to the signal.

#pragma once

#include <string>
#include <vector>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/robustness.hpp"
#include "stlsmooth/signal.hpp"

namespace stlsmooth {

struct RobustnessGradient {
  double value = 0.0;
  /// d value / d y_{t,j}; same shape as the signal.
  RowMatrix dsignal;
};

/// d smooth_min / d a_i = exp(-k1 a_i) / sum_j exp(-k1 a_j).
std::vector<double> grad_smooth_min(std::span<const double> a, double k1);
/// d smooth_max / d a_i = w_i (1 + k2 (a_i - smooth_max(a))), w the softmax
/// of k2 a. Entries sum to one but can be negative.
std::vector<double> grad_smooth_max(std::span<const double> a, double k2);

/// Robustness at time 0 and its gradient by one forward and one reverse sweep.
/// cfg must be EF or LSE; phi must be in negation-normal form. The value is
/// the same double eval() returns.
RobustnessGradient eval_with_gradient(const Formula& phi, const Signal& y, const SemanticsConfig& cfg,
                                      OpCounter* counter = nullptr);

/// Central differences (rho(y + h e) - rho(y - h e)) / 2h for every entry.
RowMatrix finite_difference_gradient(const Formula& phi, const Signal& y, const SemanticsConfig& cfg,
                                     double h);

/// CSV with header `t,d_y0,...`.
void write_gradient_csv(const std::string& path, const RowMatrix& dsignal);
RowMatrix read_gradient_csv(const std::string& path);

}  // namespace stlsmooth
