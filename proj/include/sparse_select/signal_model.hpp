#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "sparse_select/extremal.hpp"
#include "sparse_select/rng.hpp"

namespace sparse_select {

/// Activity pattern eta over the d components, with exactly s ones.
struct SparsityPattern {
  std::vector<std::uint8_t> eta;
  int d = 0;
  int s = 0;
};

enum class SignMode { Fixed, Rademacher };

/// Fourier coefficients of the additive components, rows j = 1..d over the
/// frequencies 1 <= |k| <= K. Columns interleave the pair: 2(k-1) holds +k
/// (cosine) and 2(k-1)+1 holds -k (sine).
struct SignalMatrix {
  std::vector<double> theta;  // row-major, d x 2K
  int d = 0;
  int K = 0;
  SparsityPattern pattern;
  double radius = 0.0;

  std::span<const double> row(int j) const {
    return {theta.data() + static_cast<std::size_t>(j) * 2 * K, static_cast<std::size_t>(2 * K)};
  }
};

/// Empirical Fourier coefficients X = theta + eps * xi, same layout.
struct ObservationMatrix {
  std::vector<double> x;  // row-major, d x 2K
  int d = 0;
  int K = 0;
  double eps = 0.0;

  std::span<const double> row(int j) const {
    return {x.data() + static_cast<std::size_t>(j) * 2 * K, static_cast<std::size_t>(2 * K)};
  }
  std::span<const double> row_prefix(int j, int pairs) const {
    return {x.data() + static_cast<std::size_t>(j) * 2 * K, static_cast<std::size_t>(2 * pairs)};
  }
};

/// Uniform draw from the patterns with exactly s active components
/// (partial Fisher-Yates over the index array).
inline SparsityPattern sample_pattern(int d, int s, Rng& rng) {
  if (d < 1 || s < 1 || s > d) throw std::domain_error("sample_pattern: need 1 <= s <= d");
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  SparsityPattern p{std::vector<std::uint8_t>(d, 0), d, s};
  for (int i = 0; i < s; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[i], idx[j]);
    p.eta[idx[i]] = 1;
  }
  return p;
}

/// Places +-theta*_k on every active row (all + in Fixed mode, independent
/// uniform signs in Rademacher mode); inactive rows stay zero. k_min pads the
/// matrix with zero frequency columns so wider statistics can read it.
inline SignalMatrix embed_signal(const ExtremalProfile& profile, const SparsityPattern& pattern,
                                 SignMode mode, Rng& rng, int k_min = 0) {
  const int K = std::max(profile.bandwidth, k_min);
  SignalMatrix sig;
  sig.d = pattern.d;
  sig.K = K;
  sig.pattern = pattern;
  sig.radius = profile.r;
  sig.theta.assign(static_cast<std::size_t>(sig.d) * 2 * K, 0.0);
  for (int j = 0; j < sig.d; ++j) {
    if (!pattern.eta[j]) continue;
    double* row = sig.theta.data() + static_cast<std::size_t>(j) * 2 * K;
    for (int k = 0; k < profile.bandwidth; ++k) {
      const double t = profile.theta_star[k];
      if (mode == SignMode::Fixed) {
        row[2 * k] = t;
        row[2 * k + 1] = t;
      } else {
        row[2 * k] = rng.sign() * t;
        row[2 * k + 1] = rng.sign() * t;
      }
    }
  }
  return sig;
}

/// Sequence space model X_{j,k} = theta_{j,k} + eps * xi_{j,k}.
inline ObservationMatrix sample_observations(const SignalMatrix& signal, double eps, Rng& rng) {
  if (!(eps > 0.0)) throw std::domain_error("sample_observations: eps must be positive");
  ObservationMatrix obs;
  obs.d = signal.d;
  obs.K = signal.K;
  obs.eps = eps;
  obs.x.resize(signal.theta.size());
  for (std::size_t i = 0; i < obs.x.size(); ++i) obs.x[i] = signal.theta[i] + eps * rng.normal();
  return obs;
}

}  // namespace sparse_select
