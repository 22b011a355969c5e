#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse_select/extremal.hpp"
#include "sparse_select/signal_model.hpp"

namespace sparse_select {

/// Geometric grid of candidate sparsity levels s_m = d^{c_low + (m-1) Delta}.
struct Grid {
  int d = 0;
  double c_low = 0.0;
  double c_high = 0.0;
  double delta_step = 0.0;
  std::vector<double> points;  // s_1 < ... < s_M, real-valued
  int size() const { return static_cast<int>(points.size()); }
};

inline Grid build_grid(int d, double c_low, double c_high, double delta_step) {
  if (d < 2) throw std::domain_error("build_grid: d must be at least 2");
  if (!(c_low > 0.0 && c_low < 1.0 && c_high > 0.0 && c_high < 1.0))
    throw std::domain_error("build_grid: exponents must lie in (0,1)");
  if (c_low > c_high) throw std::domain_error("build_grid: c_low must not exceed c_high");
  if (!(delta_step > 0.0)) throw std::domain_error("build_grid: delta_step must be positive");
  // The tiny shrink absorbs upward rounding noise when the ratio is integral.
  const int M = static_cast<int>(std::ceil((c_high - c_low) / delta_step * (1.0 - 1e-14))) + 1;
  Grid g{d, c_low, c_high, delta_step, {}};
  g.points.resize(M);
  const double logd = std::log(static_cast<double>(d));
  for (int m = 0; m < M; ++m) g.points[m] = std::exp((c_low + m * delta_step) * logd);
  if (g.points.back() > static_cast<double>(d))
    throw std::domain_error("build_grid: grid exceeds d; shrink c_high or delta_step");
  return g;
}

/// Tuning schedules satisfying the required limits: delta -> 0 with
/// delta log d -> inf, Delta log d -> 0, tau -> inf with tau = o(log d).
struct Schedules {
  double delta;       // threshold slack
  double delta_step;  // grid exponent step
  double tau;         // Lepski tolerance divisor
};

inline Schedules default_schedules(int d) {
  if (d < 8) throw std::domain_error("default_schedules: d must be at least 8");
  const double logd = std::log(static_cast<double>(d));
  return {1.0 / std::sqrt(logd), std::pow(logd, -1.5), std::sqrt(logd)};
}

struct SelectorConfig {
  double delta = 0.0;
  double tau = 0.0;
  Grid grid;
};

inline SelectorConfig default_config(int d, double c_low = 0.25, double c_high = 0.75) {
  const Schedules sch = default_schedules(d);
  return {sch.delta, sch.tau, build_grid(d, c_low, c_high, sch.delta_step)};
}

struct SelectionResult {
  std::vector<std::uint8_t> eta_hat;
  std::vector<double> stats;  // t_j per component
  double threshold = 0.0;
  std::string selector;
};

/// Weighted chi-square statistic sum omega_k [ (X_{j,k}/eps)^2 - 1 ] over
/// 1 <= |k| <= K. The row must carry at least the profile's support pairs.
inline double t_statistic(std::span<const double> row, const ExtremalProfile& profile,
                          double eps) {
  if (static_cast<int>(row.size()) < 2 * profile.support ||
      static_cast<int>(row.size()) > 2 * profile.bandwidth)
    throw std::invalid_argument("t_statistic: row length does not match profile");
  const double inv_eps = 1.0 / eps;
  double t = 0.0;
  for (int k = 0; k < profile.support; ++k) {
    const double a = row[2 * k] * inv_eps;
    const double b = row[2 * k + 1] * inv_eps;
    t += profile.omega[k] * (a * a + b * b - 2.0);
  }
  return t;
}

/// Almost-full detection boundary: u(r*) = sqrt(2 log(d/s)).
inline double r_star_almost_full(const FunctionSpace& space, double eps, int d, double s) {
  if (!(s >= 1.0) || !(s < static_cast<double>(d)))
    throw std::domain_error("r_star_almost_full: need 1 <= s < d");
  return invert_u(space, eps, std::sqrt(2.0 * std::log(d / s)));
}

/// Exact-selection boundary: u(r*) = sqrt(2 log d) + sqrt(2 log s).
inline double r_star_exact(const FunctionSpace& space, double eps, int d, double s) {
  if (!(s >= 1.0) || !(s < static_cast<double>(d)))
    throw std::domain_error("r_star_exact: need 1 <= s < d");
  const double target = std::sqrt(2.0 * std::log(static_cast<double>(d))) + std::sqrt(2.0 * std::log(s));
  return invert_u(space, eps, target);
}

inline double almost_full_threshold(int d, double s, double delta) {
  return std::sqrt(2.0 * std::log(d / s) + delta * std::log(static_cast<double>(d)));
}

inline double exact_threshold(int d, double delta) {
  return std::sqrt((2.0 + delta) * std::log(static_cast<double>(d)));
}

inline double adaptive_exact_threshold(int d, int M, double delta) {
  return std::sqrt((2.0 + delta) *
                   (std::log(static_cast<double>(d)) + std::log(static_cast<double>(M))));
}

/// One thresholding rule: statistics from a solved profile, selection where
/// t_j exceeds the threshold (strictly; ties are excluded).
struct ThresholdPlan {
  ExtremalProfile profile;
  double threshold = 0.0;
  std::string selector;
};

inline SelectionResult apply_plan(const ObservationMatrix& X, const ThresholdPlan& plan) {
  if (X.K < plan.profile.support)
    throw std::invalid_argument("apply_plan: observations narrower than the profile support");
  SelectionResult res;
  res.eta_hat.resize(X.d);
  res.stats.resize(X.d);
  res.threshold = plan.threshold;
  res.selector = plan.selector;
  for (int j = 0; j < X.d; ++j) {
    const double t = t_statistic(X.row_prefix(j, plan.profile.support), plan.profile, X.eps);
    res.stats[j] = t;
    res.eta_hat[j] = t > plan.threshold ? 1 : 0;
  }
  return res;
}

inline ThresholdPlan make_almost_full_plan(const FunctionSpace& space, double eps, int d, double s,
                                           double delta) {
  if (!(delta > 0.0)) throw std::domain_error("almost_full: delta must be positive");
  const double r_star = r_star_almost_full(space, eps, d, s);
  return {solve_extremal(space, r_star, eps), almost_full_threshold(d, s, delta), "almost-full"};
}

inline ThresholdPlan make_exact_plan(const FunctionSpace& space, double eps, int d, double s,
                                     double delta) {
  if (!(delta > 0.0)) throw std::domain_error("exact: delta must be positive");
  const double r_star = r_star_exact(space, eps, d, s);
  return {solve_extremal(space, r_star, eps), exact_threshold(d, delta), "exact"};
}

/// Non-adaptive almost-full selector at known sparsity s.
inline SelectionResult almost_full_select(const ObservationMatrix& X, const FunctionSpace& space,
                                          double s, double delta) {
  return apply_plan(X, make_almost_full_plan(space, X.eps, X.d, s, delta));
}

/// Non-adaptive exact selector at known sparsity s.
inline SelectionResult exact_select(const ObservationMatrix& X, const FunctionSpace& space,
                                    double s, double delta) {
  return apply_plan(X, make_exact_plan(space, X.eps, X.d, s, delta));
}

struct LepskiTrace {
  std::vector<std::vector<std::uint8_t>> candidates;  // eta_hat(s_m), m = 1..M
  std::vector<std::vector<int>> distance;             // pairwise Hamming distances
  std::vector<double> v;                              // tolerances v_i = s_i / tau
  std::vector<std::uint8_t> admissible;               // per m
  int m_hat = 0;                                      // 1-based
};

/// Minimal admissible index m_hat = min{ m : |eta(s_m) - eta(s_i)| <= v_i
/// for all i >= m }; m = M is admissible vacuously. Exposed separately so the
/// rule can be exercised on injected candidate selections.
inline std::pair<int, LepskiTrace> lepski_choose(std::vector<std::vector<std::uint8_t>> candidates,
                                                 std::vector<double> v) {
  const int M = static_cast<int>(candidates.size());
  if (M < 1 || static_cast<int>(v.size()) != M)
    throw std::invalid_argument("lepski_choose: need one tolerance per candidate");
  LepskiTrace trace;
  trace.distance.assign(M, std::vector<int>(M, 0));
  for (int a = 0; a < M; ++a) {
    if (candidates[a].size() != candidates[0].size())
      throw std::invalid_argument("lepski_choose: candidate length mismatch");
    for (int b = a + 1; b < M; ++b) {
      int dist = 0;
      for (std::size_t j = 0; j < candidates[a].size(); ++j)
        dist += candidates[a][j] != candidates[b][j];
      trace.distance[a][b] = trace.distance[b][a] = dist;
    }
  }
  trace.admissible.assign(M, 0);
  int m_hat = M;
  for (int m = M - 1; m >= 0; --m) {
    bool ok = true;
    for (int i = m + 1; i < M && ok; ++i) ok = trace.distance[m][i] <= v[i];
    trace.admissible[m] = ok;
    if (ok) m_hat = m;
  }
  trace.m_hat = m_hat + 1;
  trace.candidates = std::move(candidates);
  trace.v = std::move(v);
  return {trace.m_hat, std::move(trace)};
}

struct LepskiPlan {
  SelectorConfig config;
  std::vector<ThresholdPlan> per_m;
  std::vector<double> v;
};

inline LepskiPlan make_lepski_plan(const FunctionSpace& space, double eps, int d,
                                   const SelectorConfig& config) {
  if (!(config.tau > 0.0)) throw std::domain_error("lepski: tau must be positive");
  LepskiPlan plan{config, {}, {}};
  for (double s_m : config.grid.points) {
    ThresholdPlan p = make_almost_full_plan(space, eps, d, s_m, config.delta);
    p.selector = "lepski";
    plan.per_m.push_back(std::move(p));
    plan.v.push_back(s_m / config.tau);
  }
  return plan;
}

struct LepskiSelection {
  int m_hat = 0;  // 1-based
  SelectionResult result;
  LepskiTrace trace;
};

inline LepskiSelection apply_lepski_plan(const ObservationMatrix& X, const LepskiPlan& plan) {
  const int M = static_cast<int>(plan.per_m.size());
  std::vector<SelectionResult> results;
  results.reserve(M);
  std::vector<std::vector<std::uint8_t>> candidates;
  candidates.reserve(M);
  for (int m = 0; m < M; ++m) {
    results.push_back(apply_plan(X, plan.per_m[m]));
    candidates.push_back(results.back().eta_hat);
  }
  auto [m_hat, trace] = lepski_choose(std::move(candidates), plan.v);
  return {m_hat, std::move(results[m_hat - 1]), std::move(trace)};
}

/// Adaptive almost-full selector: candidate selections over the sparsity grid
/// combined through Lepski's rule.
inline LepskiSelection lepski_select(const ObservationMatrix& X, const FunctionSpace& space,
                                     const SelectorConfig& config) {
  return apply_lepski_plan(X, make_lepski_plan(space, X.eps, X.d, config));
}

struct AdaptiveExactPlan {
  std::vector<ExtremalProfile> per_m;
  double threshold = 0.0;
};

inline AdaptiveExactPlan make_adaptive_exact_plan(const FunctionSpace& space, double eps, int d,
                                                  const Grid& grid, double delta) {
  if (space.kind != SpaceKind::Analytic)
    throw std::domain_error(
        "adaptive_exact_select: supported for the analytic class only");
  if (!(delta > 0.0)) throw std::domain_error("adaptive_exact: delta must be positive");
  AdaptiveExactPlan plan;
  plan.threshold = adaptive_exact_threshold(d, grid.size(), delta);
  for (double s_m : grid.points)
    plan.per_m.push_back(solve_extremal(space, r_star_exact(space, eps, d, s_m), eps));
  return plan;
}

inline SelectionResult apply_adaptive_exact_plan(const ObservationMatrix& X,
                                                 const AdaptiveExactPlan& plan) {
  SelectionResult res;
  res.threshold = plan.threshold;
  res.selector = "adaptive-exact";
  res.eta_hat.assign(X.d, 0);
  res.stats.assign(X.d, -std::numeric_limits<double>::infinity());
  for (const ExtremalProfile& profile : plan.per_m) {
    for (int j = 0; j < X.d; ++j) {
      const double t = t_statistic(X.row_prefix(j, profile.support), profile, X.eps);
      if (t > res.stats[j]) res.stats[j] = t;
    }
  }
  for (int j = 0; j < X.d; ++j) res.eta_hat[j] = res.stats[j] > plan.threshold ? 1 : 0;
  return res;
}

/// Adaptive exact selector for the analytic class: a component is active if
/// the statistic at any grid point clears the M-adjusted threshold.
inline SelectionResult adaptive_exact_select(const ObservationMatrix& X,
                                             const FunctionSpace& space, const Grid& grid,
                                             double delta) {
  return apply_adaptive_exact_plan(X, make_adaptive_exact_plan(space, X.eps, X.d, grid, delta));
}

}  // namespace sparse_select
