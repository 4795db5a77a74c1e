#include "stlsmooth/gradient.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "engine.hpp"
#include "stlsmooth/smooth_ops.hpp"

namespace stlsmooth {
namespace {

void softmax(std::span<const double> a, double k, std::span<double> out) {
  // Shift by the entry with the largest k * a_i.
  double ref = k >= 0.0 ? *std::max_element(a.begin(), a.end()) : *std::min_element(a.begin(), a.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::exp(k * (a[i] - ref));
    sum += out[i];
  }
  for (auto& w : out) w /= sum;
}

void boltzmann_weights(std::span<const double> a, double k2, std::span<double> out) {
  softmax(a, k2, out);
  const double value = detail::smooth_max(a, k2);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] *= 1.0 + k2 * (a[i] - value);
}

void check_nonempty(std::span<const double> a, const char* op) {
  if (a.empty()) throw std::invalid_argument(std::string(op) + ": empty input");
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite input");
  }
}

}  // namespace

std::vector<double> grad_smooth_min(std::span<const double> a, double k1) {
  check_nonempty(a, "grad_smooth_min");
  if (!(k1 > 0.0)) throw std::invalid_argument("grad_smooth_min: k1 must be positive");
  std::vector<double> w(a.size());
  softmax(a, -k1, w);
  return w;
}

std::vector<double> grad_smooth_max(std::span<const double> a, double k2) {
  check_nonempty(a, "grad_smooth_max");
  if (!(k2 >= 0.0)) throw std::invalid_argument("grad_smooth_max: k2 must be nonnegative");
  std::vector<double> g(a.size());
  boltzmann_weights(a, k2, g);
  return g;
}

namespace detail {

void Engine::min_weights(std::span<const double> a, std::span<double> out) const {
  const double k = cfg_.kind == SemanticsConfig::Kind::EF ? cfg_.k1 : cfg_.k;
  softmax(a, -k, out);
}

void Engine::max_weights(std::span<const double> a, std::span<double> out) const {
  if (cfg_.kind == SemanticsConfig::Kind::EF) {
    boltzmann_weights(a, cfg_.k2, out);
  } else {
    softmax(a, cfg_.k, out);
  }
}

void Engine::backward(const Trace& tr, std::span<const double> adjoint, RowMatrix& dsignal) {
  const Formula& phi = *tr.node;
  const std::size_t n = tr.values.size();

  switch (phi.kind()) {
    case Kind::Pred: {
      const auto& pr = phi.predicate();
      for (std::size_t i = 0; i < n; ++i) {
        if (adjoint[i] == 0.0) continue;
        const std::size_t t = tr.first + i;
        std::span<double> row(dsignal.data() + t * dsignal.cols(), dsignal.cols());
        pr.accumulate_gradient(y_.at(t), adjoint[i], row);
      }
      return;
    }
    case Kind::Not: {
      std::vector<double> child_adj(n);
      for (std::size_t i = 0; i < n; ++i) child_adj[i] = -adjoint[i];
      backward(tr.children[0], child_adj, dsignal);
      return;
    }
    case Kind::And:
    case Kind::Or: {
      const std::size_t m = tr.children.size();
      std::vector<std::vector<double>> child_adj(m, std::vector<double>(n, 0.0));
      std::vector<double> args(m);
      std::vector<double> w(m);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < m; ++c) args[c] = tr.children[c].values[i];
        if (phi.kind() == Kind::And) {
          min_weights(args, w);
        } else {
          max_weights(args, w);
        }
        for (std::size_t c = 0; c < m; ++c) child_adj[c][i] = adjoint[i] * w[c];
      }
      for (std::size_t c = 0; c < m; ++c) backward(tr.children[c], child_adj[c], dsignal);
      return;
    }
    case Kind::Always:
    case Kind::Eventually: {
      const auto& iv = phi.interval();
      const auto& child = tr.children[0];
      std::vector<double> child_adj(child.values.size(), 0.0);
      std::vector<double> w(iv.width());
      for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> window(child.values.data() + i, iv.width());
        if (phi.kind() == Kind::Always) {
          min_weights(window, w);
        } else {
          max_weights(window, w);
        }
        for (std::size_t j = 0; j < w.size(); ++j) child_adj[i + j] += adjoint[i] * w[j];
      }
      backward(child, child_adj, dsignal);
      return;
    }
    case Kind::Until:
    case Kind::Release: {
      const auto& iv = phi.interval();
      const auto& point = tr.children[kPointwiseChild];
      const auto& hist = tr.children[kHistoryChild];
      const bool until = phi.kind() == Kind::Until;
      std::vector<double> point_adj(point.values.size(), 0.0);
      std::vector<double> hist_adj(hist.values.size(), 0.0);
      std::vector<double> outer(iv.width());
      std::vector<double> outer_w(iv.width());
      std::vector<std::array<double, 2>> pairs(iv.width());
      std::vector<double> hist_w;
      std::array<double, 2> pair_w{};
      for (std::size_t i = 0; i < n; ++i) {
        if (adjoint[i] == 0.0) continue;
        const std::size_t t = tr.first + i;
        const std::size_t h0 = history_start(t, iv);
        for (std::size_t j = 0; j < iv.width(); ++j) {
          const std::size_t tp = t + iv.lo + j;
          std::span<const double> history(hist.values.data() + (h0 - hist.first), tp - h0 + 1);
          pairs[j][0] = point.at(tp);
          pairs[j][1] = until ? min_op(history) : max_op(history);
          outer[j] = until ? min_op(pairs[j]) : max_op(pairs[j]);
        }
        if (until) {
          max_weights(outer, outer_w);
        } else {
          min_weights(outer, outer_w);
        }
        for (std::size_t j = 0; j < iv.width(); ++j) {
          const std::size_t tp = t + iv.lo + j;
          const double a_outer = adjoint[i] * outer_w[j];
          if (until) {
            min_weights(pairs[j], pair_w);
          } else {
            max_weights(pairs[j], pair_w);
          }
          point_adj[tp - point.first] += a_outer * pair_w[0];
          const double a_hist = a_outer * pair_w[1];
          std::span<const double> history(hist.values.data() + (h0 - hist.first), tp - h0 + 1);
          hist_w.resize(history.size());
          if (until) {
            min_weights(history, hist_w);
          } else {
            max_weights(history, hist_w);
          }
          for (std::size_t s = 0; s < history.size(); ++s) hist_adj[h0 - hist.first + s] += a_hist * hist_w[s];
        }
      }
      backward(point, point_adj, dsignal);
      backward(hist, hist_adj, dsignal);
      return;
    }
  }
}

}  // namespace detail

RobustnessGradient eval_with_gradient(const Formula& phi, const Signal& y, const SemanticsConfig& cfg,
                                      OpCounter* counter) {
  if (cfg.kind == SemanticsConfig::Kind::Exact) {
    throw std::invalid_argument("gradients need a smooth semantics (ef or lse)");
  }
  detail::check_evaluable(phi, y, 0, cfg);
  detail::Engine engine(cfg, y, counter);
  auto trace = engine.forward(phi, 0, 0);
  engine.detach_counter();
  RobustnessGradient out;
  out.value = trace.values[0];
  out.dsignal = RowMatrix::Zero(y.length(), y.dim());
  const double seed = 1.0;
  engine.backward(trace, std::span<const double>(&seed, 1), out.dsignal);
  return out;
}

RowMatrix finite_difference_gradient(const Formula& phi, const Signal& y, const SemanticsConfig& cfg, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  detail::check_evaluable(phi, y, 0, cfg);
  RowMatrix grad = RowMatrix::Zero(y.length(), y.dim());
  RowMatrix work = y.values();
  for (Eigen::Index t = 0; t < work.rows(); ++t) {
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      const double orig = work(t, j);
      work(t, j) = orig + h;
      const double plus = eval(phi, Signal(work), 0, cfg);
      work(t, j) = orig - h;
      const double minus = eval(phi, Signal(work), 0, cfg);
      work(t, j) = orig;
      grad(t, j) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

void write_gradient_csv(const std::string& path, const RowMatrix& dsignal) {
  write_matrix_csv(path, dsignal, "d_y");
}

RowMatrix read_gradient_csv(const std::string& path) { return read_matrix_csv(path, "d_y"); }

}  // namespace stlsmooth
