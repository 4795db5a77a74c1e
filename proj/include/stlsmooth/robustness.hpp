// Robust semantics of STL over discrete-time signals.
//
// Exact evaluation uses true min/max. The EF semantics substitutes
// smooth_min / smooth_max and under-approximates the exact value for formulas
// in negation-normal form; LSE substitutes the log-sum-exp pair, which can
// over-approximate.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "stlsmooth/formula.hpp"
#include "stlsmooth/signal.hpp"

namespace stlsmooth {

#if defined(STL_SMOOTH_CLASSIC_UNTIL) && STL_SMOOTH_CLASSIC_UNTIL
inline constexpr bool kClassicUntil = true;
#else
/// Default until: max over t' in [t+a, t+b] of min(rho1(t'), min over
/// t'' in [t+a, t'] of rho2(t'')). The classic form swaps the operands'
/// roles and starts the history at t.
inline constexpr bool kClassicUntil = false;
#endif

struct SemanticsConfig {
  enum class Kind { Exact, EF, LSE, AGM };

  Kind kind = Kind::Exact;
  double k1 = 1.0;  // EF smooth-min sharpness, > 0
  double k2 = 1.0;  // EF smooth-max sharpness, >= 0
  double k = 1.0;   // LSE sharpness, > 0

  static SemanticsConfig exact() { return {}; }
  static SemanticsConfig ef(double k1, double k2) { return {Kind::EF, k1, k2, 1.0}; }
  static SemanticsConfig lse(double k) { return {Kind::LSE, 1.0, 1.0, k}; }
  /// Arithmetic-geometric mean semantics. Listed for completeness; every
  /// evaluation with it throws NotImplementedError.
  static SemanticsConfig agm() { return {Kind::AGM, 1.0, 1.0, 1.0}; }

  void validate() const;
};

const char* to_string(SemanticsConfig::Kind kind);
SemanticsConfig::Kind semantics_kind_from_string(const std::string& name);

class NotImplementedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Tally of scalar arguments fed to min/max operators during evaluation.
struct OpCounter {
  std::uint64_t calls = 0;
  std::uint64_t scalar_args = 0;
};

/// Robustness of phi on the suffix (y, t).
///
/// Smooth semantics require phi in negation-normal form. Throws
/// std::invalid_argument when the signal is shorter than t + horizon(phi) + 1
/// or narrower than the predicates, and NotImplementedError for AGM.
double eval(const Formula& phi, const Signal& y, std::size_t t, const SemanticsConfig& cfg,
            OpCounter* counter = nullptr);

}  // namespace stlsmooth
