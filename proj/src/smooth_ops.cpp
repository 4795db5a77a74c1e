#include "stlsmooth/smooth_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stlsmooth {
namespace detail {

double smooth_min(std::span<const double> a, double k1) {
  const double lo = *std::min_element(a.begin(), a.end());
  // The minimal element contributes exactly exp(0) = 1.
  double rest = 0.0;
  bool seen_min = false;
  for (double v : a) {
    if (v == lo && !seen_min) {
      seen_min = true;
      continue;
    }
    rest += std::exp(-k1 * (v - lo));
  }
  return lo - std::log1p(rest) / k1;
}

double smooth_max(std::span<const double> a, double k2) {
  const double hi = *std::max_element(a.begin(), a.end());
  double num = 0.0;
  double den = 0.0;
  for (double v : a) {
    const double w = std::exp(k2 * (v - hi));
    num += (v - hi) * w;
    den += w;
  }
  // num <= 0 and den >= 1, so the result never exceeds hi.
  return hi + num / den;
}

double lse_max(std::span<const double> a, double k) {
  const double hi = *std::max_element(a.begin(), a.end());
  double rest = 0.0;
  bool seen_max = false;
  for (double v : a) {
    if (v == hi && !seen_max) {
      seen_max = true;
      continue;
    }
    rest += std::exp(k * (v - hi));
  }
  return hi + std::log1p(rest) / k;
}

}  // namespace detail

namespace {

void check_input(std::span<const double> a, const char* op) {
  if (a.empty()) throw std::invalid_argument(std::string(op) + ": empty input");
  for (double v : a) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite input");
  }
}

}  // namespace

double smooth_min(std::span<const double> a, double k1) {
  check_input(a, "smooth_min");
  if (!(k1 > 0.0)) throw std::invalid_argument("smooth_min: k1 must be positive");
  return detail::smooth_min(a, k1);
}

double smooth_max(std::span<const double> a, double k2) {
  check_input(a, "smooth_max");
  if (!(k2 >= 0.0)) throw std::invalid_argument("smooth_max: k2 must be nonnegative");
  return detail::smooth_max(a, k2);
}

double lse_max(std::span<const double> a, double k) {
  check_input(a, "lse_max");
  if (!(k > 0.0)) throw std::invalid_argument("lse_max: k must be positive");
  return detail::lse_max(a, k);
}

double lse_min(std::span<const double> a, double k) {
  check_input(a, "lse_min");
  if (!(k > 0.0)) throw std::invalid_argument("lse_min: k must be positive");
  return detail::smooth_min(a, k);
}

double min_error_bound(std::size_t m, double k1) {
  if (m == 0) throw std::invalid_argument("min_error_bound: m must be at least 1");
  if (!(k1 > 0.0)) throw std::invalid_argument("min_error_bound: k1 must be positive");
  return std::log(static_cast<double>(m)) / k1;
}

double max_error_bound(std::span<const double> a, double k2) {
  if (a.size() < 2) throw std::invalid_argument("max_error_bound: needs at least two elements");
  check_input(a, "max_error_bound");
  if (!(k2 >= 0.0)) throw std::invalid_argument("max_error_bound: k2 must be nonnegative");
  if (!std::is_sorted(a.begin(), a.end(), std::greater<>())) {
    throw std::invalid_argument("max_error_bound: input must be sorted descending");
  }
  const double m = static_cast<double>(a.size());
  const double spread = a.front() - a.back();
  return spread / (std::exp(k2 * (a[0] - a[1])) / (m - 1.0) + 1.0);
}

}  // namespace stlsmooth
