// Seeded random formulas and signals for property tests.

#pragma once

#include <random>
#include <vector>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/signal.hpp"

namespace gen {

using stlsmooth::Formula;
using stlsmooth::Interval;

struct Options {
  std::size_t p = 2;            // signal dimension
  std::size_t max_depth = 3;    // operator nesting above predicates
  std::size_t max_horizon = 8;  // horizon budget of the whole formula
  bool nnf = true;              // negation only directly above predicates
  double coefficient_range = 2.0;
};

inline Formula random_predicate(std::mt19937_64& rng, const Options& o) {
  std::uniform_real_distribution<double> coef(-o.coefficient_range, o.coefficient_range);
  std::vector<double> c(o.p);
  for (auto& v : c) v = coef(rng);
  return Formula::pred(stlsmooth::Predicate(std::move(c), coef(rng)));
}

inline Interval random_interval(std::mt19937_64& rng, std::size_t budget) {
  const std::size_t hi = std::uniform_int_distribution<std::size_t>(0, budget)(rng);
  const std::size_t lo = std::uniform_int_distribution<std::size_t>(0, hi)(rng);
  return {lo, hi};
}

/// Random formula whose horizon is at most `budget`.
inline Formula random_formula(std::mt19937_64& rng, const Options& o, std::size_t depth, std::size_t budget) {
  if (depth == 0) {
    Formula p = random_predicate(rng, o);
    return std::bernoulli_distribution(0.3)(rng) ? Formula::negate(p) : p;
  }
  // 0 Pred, 1 Not, 2 And, 3 Or, 4 G, 5 F, 6 U, 7 R
  const int kind = std::uniform_int_distribution<int>(0, 7)(rng);
  auto sub = [&](std::size_t b) { return random_formula(rng, o, depth - 1, b); };
  switch (kind) {
    case 0:
      return random_predicate(rng, o);
    case 1:
      return o.nnf ? Formula::negate(random_predicate(rng, o)) : Formula::negate(sub(budget));
    case 2:
    case 3: {
      const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
      std::vector<Formula> cs;
      for (std::size_t i = 0; i < n; ++i) cs.push_back(sub(budget));
      return kind == 2 ? Formula::conj(std::move(cs)) : Formula::disj(std::move(cs));
    }
    case 4:
    case 5: {
      const Interval iv = random_interval(rng, budget);
      Formula c = sub(budget - iv.hi);
      return kind == 4 ? Formula::always(iv, c) : Formula::eventually(iv, c);
    }
    default: {
      const Interval iv = random_interval(rng, budget);
      Formula l = sub(budget - iv.hi);
      Formula r = sub(budget - iv.hi);
      return kind == 6 ? Formula::until(iv, l, r) : Formula::release(iv, l, r);
    }
  }
}

inline Formula random_formula(std::mt19937_64& rng, const Options& o = {}) {
  const std::size_t depth = std::uniform_int_distribution<std::size_t>(1, o.max_depth)(rng);
  return random_formula(rng, o, depth, o.max_horizon);
}

inline stlsmooth::Signal random_signal(std::mt19937_64& rng, std::size_t length, std::size_t p, double range = 3.0) {
  std::uniform_real_distribution<double> dist(-range, range);
  stlsmooth::RowMatrix m(length, p);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = dist(rng);
  }
  return stlsmooth::Signal(std::move(m));
}

/// Records which node kinds appear in phi.
inline void collect_kinds(const Formula& phi, std::vector<bool>& seen) {
  seen.resize(8);
  seen[static_cast<std::size_t>(phi.kind())] = true;
  for (const auto& c : phi.children()) collect_kinds(c, seen);
}

}  // namespace gen
