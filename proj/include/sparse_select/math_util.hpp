#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sparse_select {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Euler beta function B(a, b) evaluated through log-gamma.
inline double beta_function(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("beta_function: arguments must be positive");
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// log(cosh(x)) without overflow; |x| can reach the hundreds.
inline double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

inline double sq(double x) { return x * x; }

}  // namespace sparse_select
