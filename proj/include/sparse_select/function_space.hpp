#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <utility>

#include "sparse_select/math_util.hpp"

namespace sparse_select {

enum class SpaceKind { Sobolev, Analytic };

/// An ellipsoid family over Fourier coefficients: Sobolev semi-axes
/// c_k = (2*pi*|k|)^sigma, analytic semi-axes c_k = exp(2*pi*sigma*|k|).
struct FunctionSpace {
  SpaceKind kind;
  double sigma;

  FunctionSpace(SpaceKind kind_, double sigma_) : kind(kind_), sigma(sigma_) {
    if (!(sigma > 0.0)) throw std::domain_error("FunctionSpace: sigma must be positive");
  }
};

inline FunctionSpace sobolev_space(double sigma) { return {SpaceKind::Sobolev, sigma}; }
inline FunctionSpace analytic_space(double sigma) { return {SpaceKind::Analytic, sigma}; }

/// Semi-axis c_k; the constant component k = 0 is excluded by the mean-zero
/// side condition.
inline double semi_axis(const FunctionSpace& space, int k) {
  if (k == 0) throw std::domain_error("semi_axis: k = 0 excluded (mean-zero side condition)");
  const double a = std::abs(k);
  return space.kind == SpaceKind::Sobolev ? std::pow(two_pi * a, space.sigma)
                                          : std::exp(two_pi * space.sigma * a);
}

/// Number of active frequency pairs K for the extremal profile at radius r:
/// floor((4s+1)^{1/(2s)} r^{-1/s}) in the Sobolev case,
/// floor(log(1/r) / (2*pi*s)) in the analytic case.
inline int bandwidth(const FunctionSpace& space, double r) {
  if (!(r > 0.0)) throw std::domain_error("bandwidth: r must be positive");
  double k;
  if (space.kind == SpaceKind::Sobolev) {
    k = std::pow(4.0 * space.sigma + 1.0, 1.0 / (2.0 * space.sigma)) *
        std::pow(r, -1.0 / space.sigma);
  } else {
    if (!(r < 1.0)) throw std::domain_error("bandwidth: analytic class requires r < 1");
    k = std::log(1.0 / r) / (two_pi * space.sigma);
  }
  const double flo = std::floor(k);
  if (flo < 1.0) throw std::domain_error("bandwidth: radius too large for nondegenerate profile");
  if (!(flo < 2e7)) throw std::domain_error("bandwidth: radius too small, profile would not fit in memory");
  return static_cast<int>(flo);
}

/// Orthonormal trigonometric basis on [0,1]:
/// phi_0 = 1, phi_k = sqrt(2) cos(2*pi*k*x), phi_{-k} = sqrt(2) sin(2*pi*k*x).
inline double basis_eval(int k, double x) {
  if (k == 0) return 1.0;
  if (k > 0) return std::numbers::sqrt2 * std::cos(two_pi * k * x);
  return std::numbers::sqrt2 * std::sin(two_pi * (-k) * x);
}

/// Ellipsoid norm sqrt(sum c_k^2 theta_k^2) of a finitely supported
/// coefficient list given as (k, theta_k) pairs, k != 0.
inline double space_norm(std::span<const std::pair<int, double>> coeffs,
                         const FunctionSpace& space) {
  double total = 0.0;
  for (const auto& [k, v] : coeffs) {
    const double c = semi_axis(space, k);
    total += sq(c * v);
  }
  return std::sqrt(total);
}

}  // namespace sparse_select
