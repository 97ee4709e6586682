#include <gtest/gtest.h>

#include <cmath>

#include "pairstab/analysis/bound.hpp"
#include "pairstab/error.hpp"

namespace pairstab {
namespace {

BoundInputs worked() {
  BoundInputs in;
  in.c1 = 0.01;
  in.c2 = 0.0;
  in.delta = 1.0 / 101;
  in.delta_prime = 0.05;
  in.n = 101;
  in.M = 1.0;
  in.K1 = 1.0;
  return in;
}

TEST(CeilLog2, SmallValues) {
  const std::vector<unsigned> expected{0, 1, 2, 2, 3, 3, 3, 3, 4};
  for (std::size_t m = 1; m <= 9; ++m) EXPECT_EQ(ceil_log2(m), expected[m - 1]) << m;
  EXPECT_EQ(ceil_log2(100), 7u);
  EXPECT_EQ(ceil_log2(std::size_t{1} << 40), 40u);
  EXPECT_EQ(ceil_log2((std::size_t{1} << 40) + 1), 41u);
}

TEST(Lambda, WorkedExample) {
  const auto in = worked();
  const double first = 1.0 / (192 * std::exp(1.0) * std::sqrt(2.0) * 0.01 * 7);
  EXPECT_NEAR(bound_lambda(in), first, 1e-15);
  EXPECT_NEAR(bound_lambda(in), 0.019355, 1e-6);
  const auto rep = pacbayes_bound(in);
  EXPECT_NEAR(rep.lambda_moment, 10.0 / 16, 1e-15);
  EXPECT_EQ(rep.lambda, rep.lambda_stability);
}

TEST(Lambda, ZeroStabilityUsesTheMomentBranch) {
  auto in = worked();
  in.c1 = 0.0;
  const auto rep = pacbayes_bound(in);
  EXPECT_TRUE(std::isinf(rep.lambda_stability));
  EXPECT_EQ(rep.lambda, rep.lambda_moment);
}

TEST(Terms, MainAndResidual) {
  auto in = worked();
  in.delta_prime = std::exp(-3.0);
  const auto rep = pacbayes_bound(in);
  EXPECT_NEAR(rep.main_term, 6.0 / rep.lambda, 1e-12);
  EXPECT_NEAR(rep.residual_term, std::pow(101.0, -5.0 / 6), 1e-15);
  EXPECT_EQ(rep.total, rep.main_term + rep.residual_term);
  EXPECT_NEAR(rep.max_form, rep.main_term, 1e-12 * rep.main_term);

  in.renyi6 = RenyiMoment::from_value(64.0);
  in.M = 2.0;
  EXPECT_NEAR(pacbayes_bound(in).residual_term, 2.0 * 2.0 * std::pow(101.0, -5.0 / 6), 1e-14);
}

TEST(Terms, ResidualStaysFiniteWhenTheMomentOverflows) {
  auto in = worked();
  in.renyi6.log_value = 900.0;  // the moment itself is e^900, past double range
  const auto rep = pacbayes_bound(in);
  EXPECT_TRUE(in.renyi6.overflow());
  EXPECT_NEAR(std::log(rep.residual_term), 150.0 - 5.0 / 6 * std::log(101.0), 1e-9);
}

TEST(Monotonicity, TotalIncreasesInKlAndLogInverseDeltaPrime) {
  auto in = worked();
  double prev = pacbayes_bound(in).total;
  for (double kl : {0.1, 1.0, 5.0, 50.0}) {
    in.kl = kl;
    const double t = pacbayes_bound(in).total;
    EXPECT_GT(t, prev);
    prev = t;
  }
  for (double dp : {0.01, 1e-3, 1e-6}) {
    in.delta_prime = dp;
    const double t = pacbayes_bound(in).total;
    EXPECT_GT(t, prev);
    prev = t;
  }
}

TEST(Validation, RejectsBadInputs) {
  auto bad = [](auto mutate) {
    auto in = worked();
    mutate(in);
    EXPECT_THROW(pacbayes_bound(in), Error);
  };
  bad([](BoundInputs& in) { in.kl = -0.1; });
  bad([](BoundInputs& in) { in.delta_prime = 1.0; });
  bad([](BoundInputs& in) { in.M = 0.0; });
  bad([](BoundInputs& in) { in.K1 = -1.0; });
  bad([](BoundInputs& in) { in.renyi6.log_value = -0.5; });
  try {
    auto in = worked();
    in.delta = 0.5;
    pacbayes_bound(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
  }
}

TEST(ReportRoundTrip, RecomputationIsBitExact) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    BoundInputs in;
    in.n = 2 + rng.below(5000);
    in.delta = (0.1 + 0.9 * rng.uniform()) / in.n;
    in.delta_prime = 0.001 + 0.9 * rng.uniform();
    in.kl = 10 * rng.uniform();
    in.renyi6.log_value = 20 * rng.uniform();
    in.c1 = rng.uniform();
    in.c2 = rng.uniform();
    in.M = 0.1 + rng.uniform();
    in.K1 = 0.1 + rng.uniform();
    const auto rep = pacbayes_bound(in);
    Report r;
    write_bound(r, rep);
    const auto back = pacbayes_bound(read_bound_inputs(Report::parse(r.format())));
    EXPECT_EQ(back.lambda, rep.lambda);
    EXPECT_EQ(back.main_term, rep.main_term);
    EXPECT_EQ(back.residual_term, rep.residual_term);
    EXPECT_EQ(back.total, rep.total);
  }
}

TEST(FromCoefficients, UsesCOnePlusCTwoLogInverseDelta) {
  const auto coeffs = stability_coefficients(StabilityCase::sgd_smooth, 1.0, 1.0, 0.01, 100, 100);
  const auto rep = pacbayes_bound(0.0, {}, 0.01, 0.05, coeffs, 100, 1.0, 1.0);
  const double beta = coeffs.c1 + coeffs.c2 * std::log(100.0);
  EXPECT_NEAR(rep.lambda_stability, 1.0 / (192 * std::exp(1.0) * std::sqrt(2.0) * beta * 7), 1e-15);
}

}  // namespace
}  // namespace pairstab
