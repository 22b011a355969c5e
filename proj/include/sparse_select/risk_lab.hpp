#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sparse_select/parallel.hpp"
#include "sparse_select/selectors.hpp"

namespace sparse_select {

inline int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming: length mismatch");
  int dist = 0;
  for (std::size_t j = 0; j < a.size(); ++j) dist += a[j] != b[j];
  return dist;
}

enum class SelectorKind { AlmostFull, Exact, LepskiAdaptive, AdaptiveExact };

inline const char* selector_name(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::AlmostFull: return "almost-full";
    case SelectorKind::Exact: return "exact";
    case SelectorKind::LepskiAdaptive: return "lepski";
    case SelectorKind::AdaptiveExact: return "adaptive-exact";
  }
  return "?";
}

struct ExperimentSpec {
  FunctionSpace space;
  int d = 0;
  int s = 0;
  double eps = 0.0;
  double rho = 1.0;  // signal radius as a multiple of the selector's boundary r*
  SelectorKind selector = SelectorKind::AlmostFull;
  SelectorConfig config;  // delta always; grid/tau for the adaptive selectors
  SignMode sign_mode = SignMode::Fixed;
  int reps = 1;
  std::uint64_t seed = 0;
};

struct RiskReport {
  double mean_normalized_risk = 0.0;  // estimate of s^{-1} E |eta_hat - eta|
  double std_error = 0.0;
  int reps = 0;
  double r_star = 0.0;         // boundary radius for the selector kind
  double signal_radius = 0.0;  // rho * r_star
  std::vector<int> hamming_counts;
};

/// Test hook: replaces the selector with an arbitrary rule that may peek at
/// the true pattern (e.g. an identity oracle).
using SelectorOverride =
    std::function<std::vector<std::uint8_t>(const ObservationMatrix&, const SparsityPattern&)>;

namespace detail {

struct ExperimentPlan {
  std::optional<ExtremalProfile> signal_profile;
  double r_star = 0.0;
  std::optional<ThresholdPlan> threshold;
  std::optional<LepskiPlan> lepski;
  std::optional<AdaptiveExactPlan> adaptive_exact;
  int k_obs = 0;  // frequency pairs the observation matrices must carry
};

inline ExperimentPlan build_plan(const ExperimentSpec& spec) {
  if (spec.s < 1 || spec.s >= spec.d) throw std::domain_error("mc_risk: need 1 <= s < d");
  if (spec.reps < 1) throw std::domain_error("mc_risk: reps must be positive");
  if (!(spec.rho > 0.0)) throw std::domain_error("mc_risk: rho must be positive");
  ExperimentPlan plan;
  int k_obs = 0;
  switch (spec.selector) {
    case SelectorKind::AlmostFull: {
      plan.threshold =
          make_almost_full_plan(spec.space, spec.eps, spec.d, spec.s, spec.config.delta);
      plan.r_star = plan.threshold->profile.r;
      k_obs = plan.threshold->profile.support;
      break;
    }
    case SelectorKind::Exact: {
      plan.threshold = make_exact_plan(spec.space, spec.eps, spec.d, spec.s, spec.config.delta);
      plan.r_star = plan.threshold->profile.r;
      k_obs = plan.threshold->profile.support;
      break;
    }
    case SelectorKind::LepskiAdaptive: {
      plan.lepski = make_lepski_plan(spec.space, spec.eps, spec.d, spec.config);
      plan.r_star = r_star_almost_full(spec.space, spec.eps, spec.d, spec.s);
      for (const auto& p : plan.lepski->per_m) k_obs = std::max(k_obs, p.profile.support);
      break;
    }
    case SelectorKind::AdaptiveExact: {
      plan.adaptive_exact = make_adaptive_exact_plan(spec.space, spec.eps, spec.d,
                                                     spec.config.grid, spec.config.delta);
      plan.r_star = r_star_exact(spec.space, spec.eps, spec.d, spec.s);
      for (const auto& p : plan.adaptive_exact->per_m) k_obs = std::max(k_obs, p.support);
      break;
    }
  }
  plan.signal_profile.emplace(solve_extremal(spec.space, spec.rho * plan.r_star, spec.eps));
  plan.k_obs = std::max(k_obs, plan.signal_profile->support);
  return plan;
}

inline std::vector<std::uint8_t> run_selector(const ObservationMatrix& X,
                                              const ExperimentPlan& plan) {
  if (plan.threshold) return apply_plan(X, *plan.threshold).eta_hat;
  if (plan.lepski) return apply_lepski_plan(X, *plan.lepski).result.eta_hat;
  return apply_adaptive_exact_plan(X, *plan.adaptive_exact).eta_hat;
}

}  // namespace detail

/// Monte Carlo normalized Hamming risk. Replication i draws its generator
/// from (seed, i), so results are independent of execution order and worker
/// count; identical specs give bit-identical reports.
inline RiskReport mc_risk(const ExperimentSpec& spec, const SelectorOverride& override_rule = {}) {
  const detail::ExperimentPlan plan = detail::build_plan(spec);
  std::vector<int> counts(spec.reps, 0);
  parallel_for_index(spec.reps, [&](std::int64_t rep) {
    Rng rng(derive_stream(spec.seed, static_cast<std::uint64_t>(rep)));
    const SparsityPattern pattern = sample_pattern(spec.d, spec.s, rng);
    const SignalMatrix signal =
        embed_signal(*plan.signal_profile, pattern, spec.sign_mode, rng, plan.k_obs);
    const ObservationMatrix X = sample_observations(signal, spec.eps, rng);
    const std::vector<std::uint8_t> eta_hat =
        override_rule ? override_rule(X, pattern) : detail::run_selector(X, plan);
    counts[rep] = hamming(eta_hat, pattern.eta);
  });

  RiskReport report;
  report.reps = spec.reps;
  report.r_star = plan.r_star;
  report.signal_radius = spec.rho * plan.r_star;
  report.hamming_counts = std::move(counts);
  double mean = 0.0;
  for (int c : report.hamming_counts) mean += static_cast<double>(c) / spec.s;
  mean /= spec.reps;
  double var = 0.0;
  for (int c : report.hamming_counts) var += sq(static_cast<double>(c) / spec.s - mean);
  report.mean_normalized_risk = mean;
  report.std_error = spec.reps > 1 ? std::sqrt(var / (spec.reps - 1) / spec.reps) : 0.0;
  return report;
}

/// Runs mc_risk at each rho with a seed derived from (spec.seed, list index);
/// rows come back sorted by rho.
inline std::vector<std::pair<double, RiskReport>> phase_sweep(const ExperimentSpec& spec,
                                                              std::span<const double> rho_list) {
  if (rho_list.empty()) throw std::domain_error("phase_sweep: rho_list must be nonempty");
  std::vector<std::pair<double, RiskReport>> out;
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    ExperimentSpec sub = spec;
    sub.rho = rho_list[i];
    sub.seed = derive_stream(spec.seed, i);
    out.emplace_back(rho_list[i], mc_risk(sub));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

struct BayesLowerBound {
  double a_hat = 0.0;        // (d/s) P_{pi,0}(Lambda >= (1-p)/p)
  double b_hat = 0.0;        // P_{pi,1}(Lambda < (1-p)/p)
  double risk_lb_hat = 0.0;  // a_hat + b_hat
  double h = 0.0;            // log((1-p)/p)
  double u = 0.0;            // u at the simulated radius
};

namespace detail {

/// Bayes-risk simulation for the two-point prior with scaled coefficients v.
/// v carries one entry per frequency pair; both signed frequencies share it.
inline BayesLowerBound bayes_lower_bound_from_v(std::span<const double> v, double p, int d,
                                                int s, int reps, std::uint64_t seed) {
  if (!(p > 0.0) || p >= 0.5)
    throw std::domain_error("bayes_lower_bound: requires p = s/d < 1/2");
  const double h = std::log1p(-p) - std::log(p);
  double v2_sum = 0.0;  // sum over both signs of v_k^2 / 2
  for (double vk : v) v2_sum += vk * vk;

  std::vector<std::uint8_t> a_hit(reps, 0), b_hit(reps, 0);
  parallel_for_index(reps, [&](std::int64_t rep) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(rep)));
    double lam0 = -v2_sum, lam1 = -v2_sum;
    for (double vk : v) {
      for (int sign_slot = 0; sign_slot < 2; ++sign_slot) {
        lam0 += log_cosh(vk * rng.normal());
        const double y = rng.sign() * vk + rng.normal();
        lam1 += log_cosh(vk * y);
      }
    }
    a_hit[rep] = lam0 >= h;
    b_hit[rep] = lam1 < h;
  });
  double a = 0.0, b = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    a += a_hit[rep];
    b += b_hit[rep];
  }
  BayesLowerBound out;
  out.h = h;
  out.a_hat = (static_cast<double>(d) / s) * a / reps;
  out.b_hat = b / reps;
  out.risk_lb_hat = out.a_hat + out.b_hat;
  return out;
}

}  // namespace detail

/// Simulates the Bayes risk decomposition under the two-point coefficient
/// prior at radius rho * r*(s): the normalized minimax risk is bounded below
/// by A + B.
inline BayesLowerBound bayes_lower_bound(const FunctionSpace& space, int d, int s, double eps,
                                         double rho, int reps, std::uint64_t seed) {
  if (s < 1 || s >= d) throw std::domain_error("bayes_lower_bound: need 1 <= s < d");
  if (reps < 1) throw std::domain_error("bayes_lower_bound: reps must be positive");
  const double r_star = r_star_almost_full(space, eps, d, s);
  const ExtremalProfile profile = solve_extremal(space, rho * r_star, eps);
  std::vector<double> v(profile.support);
  for (int k = 0; k < profile.support; ++k) v[k] = profile.theta_star[k] / eps;
  BayesLowerBound out = detail::bayes_lower_bound_from_v(
      v, static_cast<double>(s) / d, d, s, reps, seed);
  out.u = profile.u;
  return out;
}

struct TailRow {
  double T = 0.0;
  double mc_tail = 0.0;    // P_0(t <= T) estimate
  double bound = 0.0;      // exp(-T^2/2)
  double log_ratio = 0.0;  // log(mc_tail) / (-T^2/2); NaN when undefined
};

/// Null lower-tail diagnostic of the statistic against exp(-T^2/2).
inline std::vector<TailRow> tail_check(const ExtremalProfile& profile,
                                       std::span<const double> t_list, std::int64_t reps,
                                       std::uint64_t seed) {
  for (double T : t_list)
    if (T > 0.0) throw std::domain_error("tail_check: thresholds must be nonpositive");
  if (reps < 1) throw std::domain_error("tail_check: reps must be positive");

  std::vector<double> tvals(reps);
  parallel_for_index(reps, [&](std::int64_t rep) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(rep)));
    double t = 0.0;
    for (int k = 0; k < profile.support; ++k) {
      const double a = rng.normal();
      const double b = rng.normal();
      t += profile.omega[k] * (a * a + b * b - 2.0);
    }
    tvals[rep] = t;
  });

  std::vector<TailRow> rows;
  for (double T : t_list) {
    std::int64_t hits = 0;
    for (double t : tvals) hits += t <= T;
    TailRow row;
    row.T = T;
    row.mc_tail = static_cast<double>(hits) / static_cast<double>(reps);
    row.bound = std::exp(-0.5 * T * T);
    row.log_ratio = (T < 0.0 && hits > 0)
                        ? std::log(row.mc_tail) / (-0.5 * T * T)
                        : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sparse_select
