// Trace-based evaluator shared by eval() and eval_with_gradient().
//
// forward() computes a node's robustness over a contiguous range of
// timesteps, recursing into children over the ranges they are needed on.
// backward() pushes adjoints through the same structure using the cached
// child traces.

#pragma once

#include <span>
#include <vector>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/robustness.hpp"
#include "stlsmooth/signal.hpp"

namespace stlsmooth::detail {

struct Trace {
  const Formula* node = nullptr;
  std::size_t first = 0;
  std::vector<double> values;  // values[i] is the robustness at first + i
  std::vector<Trace> children;

  double at(std::size_t t) const { return values[t - first]; }
};

/// Throws unless phi can be evaluated on y at time t under cfg.
void check_evaluable(const Formula& phi, const Signal& y, std::size_t t, const SemanticsConfig& cfg);

class Engine {
 public:
  Engine(const SemanticsConfig& cfg, const Signal& y, OpCounter* counter = nullptr)
      : cfg_(cfg), y_(y), counter_(counter) {}

  Trace forward(const Formula& phi, std::size_t first, std::size_t last);
  /// Stops counting; the reverse sweep recomputes operators it already counted.
  void detach_counter() { counter_ = nullptr; }

  /// Accumulates d(root)/d y into dsignal given adjoints for tr.values.
  void backward(const Trace& tr, std::span<const double> adjoint, RowMatrix& dsignal);

 private:
  double min_op(std::span<const double> a);
  double max_op(std::span<const double> a);
  // Weights of d op / d a_i, written into out (same length as a).
  void min_weights(std::span<const double> a, std::span<double> out) const;
  void max_weights(std::span<const double> a, std::span<double> out) const;

  const SemanticsConfig& cfg_;
  const Signal& y_;
  OpCounter* counter_;
};

// Operand roles for until/release: the pointwise child is read at t', the
// history child over [history_start, t'].
inline constexpr std::size_t kPointwiseChild = kClassicUntil ? 1 : 0;
inline constexpr std::size_t kHistoryChild = kClassicUntil ? 0 : 1;

inline std::size_t history_start(std::size_t t, const Interval& iv) {
  return kClassicUntil ? t : t + iv.lo;
}

}  // namespace stlsmooth::detail
