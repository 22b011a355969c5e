#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sparse_select/selectors.hpp"

using namespace sparse_select;

namespace {

constexpr double kPi = std::numbers::pi;
const FunctionSpace kSobolev1 = sobolev_space(1.0);
const FunctionSpace kAnalyticStd = analytic_space(0.5 / kPi);

TEST(TStatistic, VanishesAtUnitScaledObservations) {
  const ExtremalProfile p = solve_extremal(kSobolev1, 0.05, 0.01);
  std::vector<double> row(2 * p.support, 0.01);  // X = eps everywhere
  EXPECT_NEAR(t_statistic(row, p, 0.01), 0.0, 1e-12);
}

TEST(TStatistic, ZeroObservationsGiveMinusWeightSum) {
  const double r = std::exp(-10.0);
  const ExtremalProfile p = solve_extremal(kAnalyticStd, r, r);
  std::vector<double> row(2 * p.support, 0.0);
  EXPECT_NEAR(t_statistic(row, p, r), -std::sqrt(10.0), 1e-9);
}

TEST(TStatistic, MeanAtExtremalSignalEqualsU) {
  // sum_k omega_k theta*_k^2 / eps^2 = u is an algebraic identity.
  for (double eps : {1e-2, 1e-3}) {
    const double r_star = r_star_almost_full(kSobolev1, eps, 1024, 32);
    const ExtremalProfile p = solve_extremal(kSobolev1, r_star, eps);
    double mean = 0.0;
    for (int k = 0; k < p.support; ++k) mean += 2.0 * p.omega[k] * sq(p.theta_star[k] / eps);
    EXPECT_NEAR(mean, p.u, 1e-12 * p.u);
  }
}

TEST(TStatistic, DimensionMismatchThrows) {
  const ExtremalProfile p = solve_extremal(kSobolev1, 0.05, 0.01);
  std::vector<double> row(2 * p.support - 2, 0.0);
  EXPECT_THROW(t_statistic(row, p, 0.01), std::invalid_argument);
}

TEST(RStar, AlmostFullBoundary) {
  const double r = r_star_almost_full(kSobolev1, 0.01, 1024, 32);
  EXPECT_NEAR(r, 0.037475861587218, 1e-6 * r);
  EXPECT_THROW(r_star_almost_full(kSobolev1, 0.01, 1024, 1024), std::domain_error);
}

TEST(RStar, ExactExceedsAlmostFull) {
  const double ra = r_star_almost_full(kSobolev1, 0.01, 1024, 32);
  const double rx = r_star_exact(kSobolev1, 0.01, 1024, 32);
  EXPECT_GT(rx, ra);
  const double target = std::sqrt(2.0 * std::log(1024.0)) + std::sqrt(2.0 * std::log(32.0));
  EXPECT_NEAR(solve_extremal(kSobolev1, rx, 0.01).u, target, 1e-7 * target);
}

TEST(RStar, ExactWithSOneUsesLogDOnly) {
  const double rx = r_star_exact(kSobolev1, 0.01, 1024, 1.0);
  const double target = std::sqrt(2.0 * std::log(1024.0));
  EXPECT_NEAR(solve_extremal(kSobolev1, rx, 0.01).u, target, 1e-7 * target);
}

TEST(Thresholds, ClosedForms) {
  EXPECT_NEAR(almost_full_threshold(1024, 32, 0.3),
              std::sqrt(2.0 * std::log(32.0) + 0.3 * std::log(1024.0)), 1e-14);
  EXPECT_NEAR(almost_full_threshold(1024, 32, 0.3), 3.0018, 1e-4);
  EXPECT_NEAR(exact_threshold(1024, 0.3), std::sqrt(2.3 * std::log(1024.0)), 1e-14);
  EXPECT_NEAR(exact_threshold(1024, 0.3), 3.9928, 1e-4);
  EXPECT_NEAR(adaptive_exact_threshold(1024, 6, 0.3),
              std::sqrt(2.3 * (std::log(1024.0) + std::log(6.0))), 1e-14);
  EXPECT_NEAR(adaptive_exact_threshold(1024, 6, 0.3), 4.4792, 1e-4);
}

TEST(Thresholds, AlmostFullNonincreasingInS) {
  double prev = std::numeric_limits<double>::infinity();
  for (double s : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0}) {
    const double t = almost_full_threshold(1024, s, 0.38);
    EXPECT_LE(t, prev);
    prev = t;
  }
}

TEST(BuildGrid, ReferenceExample) {
  const Grid g = build_grid(10000, 0.25, 0.75, 0.1);
  ASSERT_EQ(g.size(), 6);
  EXPECT_NEAR(g.points[0], 10.0, 1e-9);
  EXPECT_NEAR(g.points[1], 25.118864315095795, 1e-9);
  EXPECT_NEAR(g.points[5], 1000.0, 1e-6);
  const double ratio = std::pow(10000.0, 0.1);
  for (int m = 1; m < g.size(); ++m) EXPECT_NEAR(g.points[m] / g.points[m - 1], ratio, 1e-10);
}

TEST(BuildGrid, DegenerateAndInvalid) {
  const Grid g = build_grid(10000, 0.4, 0.4, 0.1);
  ASSERT_EQ(g.size(), 1);
  EXPECT_NEAR(g.points[0], std::pow(10000.0, 0.4), 1e-9);
  EXPECT_THROW(build_grid(10000, 0.7, 0.2, 0.1), std::domain_error);
  EXPECT_THROW(build_grid(100, 0.5, 0.95, 0.3), std::domain_error);  // grid would pass d
}

TEST(DefaultSchedules, ValuesAndRegimes) {
  const Schedules s = default_schedules(1024);
  const double logd = std::log(1024.0);
  EXPECT_NEAR(s.delta, 1.0 / std::sqrt(logd), 1e-14);
  EXPECT_NEAR(s.delta, 0.37989, 1e-4);
  EXPECT_NEAR(s.delta_step, std::pow(logd, -1.5), 1e-14);
  EXPECT_NEAR(s.tau, std::sqrt(logd), 1e-14);
  EXPECT_NEAR(s.tau, 2.63277, 1e-4);

  double prev_delta = 1e9, prev_step = 1e9, prev_tau = 0.0, prev_dlogd = 0.0;
  for (int d = 16; d <= 1 << 20; d *= 2) {
    const Schedules cur = default_schedules(d);
    EXPECT_LT(cur.delta, prev_delta);
    EXPECT_LT(cur.delta_step, prev_step);
    EXPECT_GT(cur.tau, prev_tau);
    const double dlogd = cur.delta * std::log(static_cast<double>(d));
    EXPECT_GT(dlogd, prev_dlogd);  // delta log d grows without bound
    EXPECT_LT(cur.delta_step * std::log(static_cast<double>(d)),
              prev_step * std::log(static_cast<double>(d) / 2.0) + 1e-12);  // Delta log d shrinks
    prev_delta = cur.delta;
    prev_step = cur.delta_step;
    prev_tau = cur.tau;
    prev_dlogd = dlogd;
  }
}

TEST(LepskiChoose, AllCandidatesIdentical) {
  std::vector<std::vector<std::uint8_t>> cands(4, std::vector<std::uint8_t>{1, 0, 1, 0});
  const auto [m_hat, trace] = lepski_choose(cands, {0.5, 1.0, 2.0, 4.0});
  EXPECT_EQ(m_hat, 1);
  EXPECT_TRUE(trace.admissible[0]);
}

TEST(LepskiChoose, InjectedDisagreementForcesLargerIndex) {
  std::vector<std::vector<std::uint8_t>> cands{{1, 1, 1, 1}, {0, 0, 0, 0}};
  const auto [m_hat, trace] = lepski_choose(cands, {1.0, 3.0});  // v_2 < 4
  EXPECT_EQ(m_hat, 2);
  EXPECT_EQ(trace.distance[0][1], 4);
  EXPECT_FALSE(trace.admissible[0]);
  EXPECT_TRUE(trace.admissible[1]);
}

TEST(LepskiChoose, AlwaysDefined) {
  Rng rng(5150);
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 1 + static_cast<int>(rng.below(6));
    const int d = 1 + static_cast<int>(rng.below(12));
    std::vector<std::vector<std::uint8_t>> cands(M, std::vector<std::uint8_t>(d));
    for (auto& c : cands)
      for (auto& b : c) b = rng.below(2);
    std::vector<double> v(M);
    for (int i = 0; i < M; ++i) v[i] = static_cast<double>(rng.below(4));
    const auto [m_hat, trace] = lepski_choose(cands, v);
    EXPECT_GE(m_hat, 1);
    EXPECT_LE(m_hat, M);
    EXPECT_TRUE(trace.admissible[m_hat - 1]);
    for (int m = 0; m + 1 < m_hat; ++m) {
      if (trace.admissible[m]) ADD_FAILURE() << "smaller admissible index exists";
    }
  }
}

TEST(Selectors, AllZeroObservationsSelectNothing) {
  ObservationMatrix X;
  X.d = 8;
  X.K = 64;
  X.eps = 0.01;
  X.x.assign(static_cast<std::size_t>(X.d) * 2 * X.K, 0.0);
  const SelectionResult af = almost_full_select(X, kSobolev1, 2.0, 0.3);
  const SelectionResult ex = exact_select(X, kSobolev1, 2.0, 0.3);
  for (int j = 0; j < X.d; ++j) {
    EXPECT_EQ(af.eta_hat[j], 0);
    EXPECT_EQ(ex.eta_hat[j], 0);
    EXPECT_LT(af.stats[j], 0.0);
  }
}

TEST(Selectors, ResultStatsConsistentWithThreshold) {
  Rng rng(8080);
  ObservationMatrix X;
  X.d = 32;
  X.K = 64;
  X.eps = 0.01;
  X.x.resize(static_cast<std::size_t>(X.d) * 2 * X.K);
  for (auto& v : X.x) v = 0.01 * rng.normal();
  const SelectionResult af = almost_full_select(X, kSobolev1, 4.0, 0.38);
  for (int j = 0; j < X.d; ++j) {
    EXPECT_EQ(af.eta_hat[j] == 1, af.stats[j] > af.threshold);
  }
}

TEST(AdaptiveExact, SobolevUnsupported) {
  ObservationMatrix X;
  X.d = 4;
  X.K = 8;
  X.eps = 0.01;
  X.x.assign(static_cast<std::size_t>(X.d) * 2 * X.K, 0.0);
  const Grid grid = build_grid(1024, 0.25, 0.75, 0.25);
  EXPECT_THROW(adaptive_exact_select(X, kSobolev1, grid, 0.3), std::domain_error);
}

TEST(AdaptiveExact, MaxRuleOverGridPoints) {
  const int d = 16;
  const double eps = std::exp(-203.0);
  const Grid grid = build_grid(1024, 0.25, 0.75, 0.25);
  const AdaptiveExactPlan plan = make_adaptive_exact_plan(kAnalyticStd, eps, 1024, grid, 0.38);

  Rng rng(31415);
  int k_obs = 0;
  for (const auto& p : plan.per_m) k_obs = std::max(k_obs, p.support);
  ObservationMatrix X;
  X.d = d;
  X.K = k_obs;
  X.eps = eps;
  X.x.resize(static_cast<std::size_t>(d) * 2 * k_obs);
  for (auto& v : X.x) v = eps * rng.normal();

  const SelectionResult res = apply_adaptive_exact_plan(X, plan);
  for (int j = 0; j < d; ++j) {
    double best = -1e300;
    bool fired = false;
    for (const auto& p : plan.per_m) {
      const double t = t_statistic(X.row_prefix(j, p.support), p, eps);
      best = std::max(best, t);
      fired = fired || t > plan.threshold;
    }
    EXPECT_NEAR(res.stats[j], best, 1e-12);
    EXPECT_EQ(res.eta_hat[j] == 1, fired);
  }
}

TEST(AdaptiveExact, NullFalsePositiveRate) {
  // d = 1024, M = 6, pure noise: expected false positives per run < 0.05.
  const int d = 1024, reps = 500;
  const double eps = std::exp(-203.0);
  const Grid grid = build_grid(d, 0.25, 0.75, 0.1);
  ASSERT_EQ(grid.size(), 6);
  const AdaptiveExactPlan plan =
      make_adaptive_exact_plan(kAnalyticStd, eps, d, grid, default_schedules(d).delta);
  int k_obs = 0;
  for (const auto& p : plan.per_m) k_obs = std::max(k_obs, p.support);

  long long fp = 0;
  for (int rep = 0; rep < reps; ++rep) {
    Rng rng(derive_stream(271828, rep));
    ObservationMatrix X;
    X.d = d;
    X.K = k_obs;
    X.eps = eps;
    X.x.resize(static_cast<std::size_t>(d) * 2 * k_obs);
    for (auto& v : X.x) v = eps * rng.normal();
    const SelectionResult res = apply_adaptive_exact_plan(X, plan);
    for (int j = 0; j < d; ++j) fp += res.eta_hat[j];
  }
  EXPECT_LT(static_cast<double>(fp) / reps, 0.05);
}

TEST(LepskiSelect, PerPointProfilesUseOwnBandwidths) {
  const int d = 1024;
  const double eps = 3e-4;
  SelectorConfig cfg = default_config(d);
  const LepskiPlan plan = make_lepski_plan(kSobolev1, eps, d, cfg);
  ASSERT_EQ(static_cast<int>(plan.per_m.size()), cfg.grid.size());
  // Larger s_m -> smaller target -> smaller r* -> wider support.
  for (std::size_t m = 1; m < plan.per_m.size(); ++m) {
    EXPECT_LT(plan.per_m[m - 1].profile.support, plan.per_m[m].profile.support + 1);
    EXPECT_GT(plan.per_m[m].profile.r, 0.0);
    EXPECT_LT(plan.per_m[m].profile.r, plan.per_m[m - 1].profile.r);
  }
  // v is nondecreasing by construction.
  for (std::size_t i = 1; i < plan.v.size(); ++i) EXPECT_GE(plan.v[i], plan.v[i - 1]);
}

}  // namespace
