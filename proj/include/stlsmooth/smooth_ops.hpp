// Smooth approximations of min and max.
//
// smooth_min is the log-sum-exp under-approximation of min; smooth_max is the
// Boltzmann (softmax-weighted mean) under-approximation of max. lse_max is the
// log-sum-exp over-approximation used by the older, unsound semantics.
// All are computed in shifted form so k * a_i never overflows.

#pragma once

#include <cstddef>
#include <span>

namespace stlsmooth {

/// -(1/k1) log sum_i exp(-k1 a_i). k1 > 0.
double smooth_min(std::span<const double> a, double k1);
/// sum_i a_i exp(k2 a_i) / sum_i exp(k2 a_i). k2 >= 0; k2 = 0 is the mean.
double smooth_max(std::span<const double> a, double k2);
/// (1/k) log sum_i exp(k a_i) >= max(a). k > 0.
double lse_max(std::span<const double> a, double k);
/// -(1/k) log sum_i exp(-k a_i); identical to smooth_min.
double lse_min(std::span<const double> a, double k);

/// Worst-case gap min(a) - smooth_min(a) = log(m) / k1.
double min_error_bound(std::size_t m, double k1);
/// Bound on max(a) - smooth_max(a) for `a` sorted descending, m >= 2:
/// (a_1 - a_m) / (exp(k2 (a_1 - a_2)) / (m - 1) + 1).
double max_error_bound(std::span<const double> a_sorted_desc, double k2);

namespace detail {
// Unchecked versions for the evaluator's inner loops (a nonempty, k valid).
double smooth_min(std::span<const double> a, double k1);
double smooth_max(std::span<const double> a, double k2);
double lse_max(std::span<const double> a, double k);
}  // namespace detail

}  // namespace stlsmooth
