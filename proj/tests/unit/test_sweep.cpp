#include <gtest/gtest.h>

#include <cmath>

#include "pairstab/analysis/sweep.hpp"
#include "pairstab/error.hpp"

namespace pairstab {
namespace {

TEST(FitLogLog, ExactPowerLaw) {
  const std::vector<double> x{10, 20, 40, 80};
  std::vector<double> y, se;
  for (double v : x) {
    y.push_back(3.0 * std::pow(v, -0.5));
    se.push_back(0.01 * y.back());
  }
  const auto fit = fit_log_log(x, y, se);
  EXPECT_NEAR(fit.slope, -0.5, 1e-12);
  // Delta method: var(slope) = sum a_i^2 (se_i/y_i)^2, a_i = (u_i - ubar)/Sxx.
  double ubar = 0, sxx = 0, var = 0;
  for (double v : x) ubar += std::log(v) / 4;
  for (double v : x) sxx += std::pow(std::log(v) - ubar, 2);
  for (double v : x) var += std::pow((std::log(v) - ubar) / sxx, 2) * 1e-4;
  EXPECT_NEAR(fit.se, std::sqrt(var), 1e-12);
}

TEST(FitLogLog, RejectsDegenerateInput) {
  EXPECT_THROW(fit_log_log({1}, {1}, {0}), Error);
  EXPECT_THROW(fit_log_log({2, 2, 2}, {1, 2, 3}, {0, 0, 0}), Error);
  EXPECT_THROW(fit_log_log({1, 2, 3}, {1, 0, 1}, {0, 0, 0}), Error);
}

TEST(RateSweep, ConstantLossIsDegenerate) {
  SweepConfig cfg;
  cfg.n_grid = {8, 16, 32};
  cfg.replicates = 3;
  cfg.loss.name = "constant";
  cfg.m_population = 100;
  const auto rep = rate_sweep(cfg, 1);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(std::isnan(rep.slope));
  ASSERT_EQ(rep.rows.size(), 3u);
  for (const auto& row : rep.rows) {
    EXPECT_EQ(row.mean_abs_gap, 0.0);
    EXPECT_EQ(row.dominated, 3u);
  }
}

TEST(RateSweep, RowsFollowTheRecipe) {
  SweepConfig cfg;
  cfg.regime = Regime::nonsmooth;
  cfg.loss.name = "hinge";
  cfg.n_grid = {8, 12, 16};
  cfg.replicates = 2;
  cfg.m_population = 500;
  const auto rep = rate_sweep(cfg, 2);
  for (const auto& row : rep.rows) {
    const auto r = recipe(Algorithm::sgd, Regime::nonsmooth, row.n, 1.0);
    EXPECT_EQ(row.T, r.T);
    EXPECT_EQ(row.eta, r.eta);
    EXPECT_EQ(row.gaps.size(), 2u);
  }
  const auto again = rate_sweep(cfg, 2, 3);
  EXPECT_EQ(again.slope, rep.slope);
  cfg.n_grid = {16, 8, 32};
  EXPECT_THROW(rate_sweep(cfg, 2), Error);
  cfg.n_grid = {8, 16, 32};
  cfg.replicates = 1;
  EXPECT_THROW(rate_sweep(cfg, 2), Error);
}

TEST(RateSweep, DoublingReplicatesStaysInsideTheInterval) {
  SweepConfig cfg;
  cfg.n_grid = {32, 64, 128};
  cfg.m_population = 20000;
  cfg.replicates = 10;
  const auto a = rate_sweep(cfg, 3);
  cfg.replicates = 20;
  const auto b = rate_sweep(cfg, 3);
  EXPECT_GE(b.slope, a.ci_low);
  EXPECT_LE(b.slope, a.ci_high);
}

}  // namespace
}  // namespace pairstab
