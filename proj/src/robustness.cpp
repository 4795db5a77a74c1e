#include "stlsmooth/robustness.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "engine.hpp"
#include "stlsmooth/smooth_ops.hpp"

namespace stlsmooth {

void SemanticsConfig::validate() const {
  switch (kind) {
    case Kind::Exact: return;
    case Kind::EF:
      if (!(k1 > 0.0) || !std::isfinite(k1)) throw std::invalid_argument("EF semantics needs k1 > 0");
      if (!(k2 >= 0.0) || !std::isfinite(k2)) throw std::invalid_argument("EF semantics needs k2 >= 0");
      return;
    case Kind::LSE:
      if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("LSE semantics needs k > 0");
      return;
    case Kind::AGM:
      throw NotImplementedError("AGM semantics is not implemented (out of scope)");
  }
}

const char* to_string(SemanticsConfig::Kind kind) {
  switch (kind) {
    case SemanticsConfig::Kind::Exact: return "exact";
    case SemanticsConfig::Kind::EF: return "ef";
    case SemanticsConfig::Kind::LSE: return "lse";
    case SemanticsConfig::Kind::AGM: return "agm";
  }
  return "?";
}

SemanticsConfig::Kind semantics_kind_from_string(const std::string& name) {
  if (name == "exact") return SemanticsConfig::Kind::Exact;
  if (name == "ef") return SemanticsConfig::Kind::EF;
  if (name == "lse") return SemanticsConfig::Kind::LSE;
  if (name == "agm") return SemanticsConfig::Kind::AGM;
  throw std::invalid_argument("unknown semantics '" + name + "' (expected exact, ef, lse or agm)");
}

namespace detail {

void check_evaluable(const Formula& phi, const Signal& y, std::size_t t, const SemanticsConfig& cfg) {
  cfg.validate();
  if (cfg.kind != SemanticsConfig::Kind::Exact && !is_nnf(phi)) {
    throw std::invalid_argument("smooth semantics require a formula in negation-normal form");
  }
  const auto h = horizon(phi);
  if (t + h > y.last_step()) {
    throw std::invalid_argument("signal too short: evaluating at t=" + std::to_string(t) + " needs " +
                                std::to_string(t + h + 1) + " samples, got " + std::to_string(y.length()));
  }
  const auto p = required_dim(phi);
  if (p > y.dim()) {
    throw std::invalid_argument("formula references y" + std::to_string(p - 1) + " but the signal has dimension " +
                                std::to_string(y.dim()));
  }
}

double Engine::min_op(std::span<const double> a) {
  if (counter_) {
    ++counter_->calls;
    counter_->scalar_args += a.size();
  }
  switch (cfg_.kind) {
    case SemanticsConfig::Kind::EF: return detail::smooth_min(a, cfg_.k1);
    case SemanticsConfig::Kind::LSE: return detail::smooth_min(a, cfg_.k);
    default: return *std::min_element(a.begin(), a.end());
  }
}

double Engine::max_op(std::span<const double> a) {
  if (counter_) {
    ++counter_->calls;
    counter_->scalar_args += a.size();
  }
  switch (cfg_.kind) {
    case SemanticsConfig::Kind::EF: return detail::smooth_max(a, cfg_.k2);
    case SemanticsConfig::Kind::LSE: return detail::lse_max(a, cfg_.k);
    default: return *std::max_element(a.begin(), a.end());
  }
}

Trace Engine::forward(const Formula& phi, std::size_t first, std::size_t last) {
  Trace tr;
  tr.node = &phi;
  tr.first = first;
  const std::size_t n = last - first + 1;
  tr.values.resize(n);

  switch (phi.kind()) {
    case Kind::Pred: {
      const auto& pr = phi.predicate();
      for (std::size_t i = 0; i < n; ++i) tr.values[i] = pr.robustness(y_.at(first + i));
      break;
    }
    case Kind::Not: {
      tr.children.push_back(forward(phi.child(0), first, last));
      for (std::size_t i = 0; i < n; ++i) tr.values[i] = -tr.children[0].values[i];
      break;
    }
    case Kind::And:
    case Kind::Or: {
      for (const auto& c : phi.children()) tr.children.push_back(forward(c, first, last));
      std::vector<double> args(tr.children.size());
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < args.size(); ++c) args[c] = tr.children[c].values[i];
        tr.values[i] = phi.kind() == Kind::And ? min_op(args) : max_op(args);
      }
      break;
    }
    case Kind::Always:
    case Kind::Eventually: {
      const auto& iv = phi.interval();
      tr.children.push_back(forward(phi.child(0), first + iv.lo, last + iv.hi));
      const auto& child = tr.children[0];
      for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> window(child.values.data() + i, iv.width());
        tr.values[i] = phi.kind() == Kind::Always ? min_op(window) : max_op(window);
      }
      break;
    }
    case Kind::Until:
    case Kind::Release: {
      const auto& iv = phi.interval();
      const std::size_t start = history_start(first, iv);
      tr.children.push_back(forward(phi.child(0), start, last + iv.hi));
      tr.children.push_back(forward(phi.child(1), start, last + iv.hi));
      const auto& point = tr.children[kPointwiseChild];
      const auto& hist = tr.children[kHistoryChild];
      const bool until = phi.kind() == Kind::Until;
      std::vector<double> outer(iv.width());
      std::array<double, 2> pair{};
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t t = first + i;
        const std::size_t h0 = history_start(t, iv);
        for (std::size_t j = 0; j < iv.width(); ++j) {
          const std::size_t tp = t + iv.lo + j;
          std::span<const double> history(hist.values.data() + (h0 - hist.first), tp - h0 + 1);
          pair[0] = point.at(tp);
          pair[1] = until ? min_op(history) : max_op(history);
          outer[j] = until ? min_op(pair) : max_op(pair);
        }
        tr.values[i] = until ? max_op(outer) : min_op(outer);
      }
      break;
    }
  }
  return tr;
}

}  // namespace detail

double eval(const Formula& phi, const Signal& y, std::size_t t, const SemanticsConfig& cfg, OpCounter* counter) {
  detail::check_evaluable(phi, y, t, cfg);
  detail::Engine engine(cfg, y, counter);
  return engine.forward(phi, t, t).values[0];
}

}  // namespace stlsmooth
