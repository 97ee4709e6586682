#include <gtest/gtest.h>

#include <cmath>

#include "pairstab/analysis/stability.hpp"
#include "pairstab/error.hpp"
#include "pairstab/model.hpp"

namespace pairstab {
namespace {

const double kE = std::exp(1.0);

TEST(Coefficients, FormulasPerCase) {
  const double L = 1.3, eta = 0.02, alpha = 0.7;
  const std::size_t t = 80, n = 40;
  const double st = std::sqrt(80.0), r = 2.0 * t / n, root = std::sqrt(r);

  auto a = stability_coefficients(StabilityCase::sgd_nonsmooth, L, std::nullopt, eta, t, n);
  EXPECT_NEAR(a.c1, 2 * std::sqrt(kE) * L * L * eta * (st + r), 1e-14);
  EXPECT_NEAR(a.c2, 4 * std::sqrt(kE) * L * L * eta * (1 + root), 1e-14);

  auto b = stability_coefficients(StabilityCase::sgd_smooth, L, alpha, eta, t, n);
  EXPECT_NEAR(b.c1, 4 * L * L * eta * t / n, 1e-14);
  EXPECT_NEAR(b.c2, 4 * L * L * eta * (1 + root), 1e-14);
  EXPECT_NEAR(b.alt_c2, 4 * L * L * eta * (1 + 2 * std::sqrt(80.0 / 40)), 1e-14);

  auto c = stability_coefficients(StabilityCase::sgda_nonsmooth, L, std::nullopt, eta, t, n);
  EXPECT_NEAR(c.c1, 2 * std::sqrt(2 * kE) * L * L * eta * (st + r), 1e-14);
  EXPECT_NEAR(c.c2, 4 * std::sqrt(2 * kE) * L * L * eta * (1 + root), 1e-14);
  EXPECT_NEAR(c.alt_c1, 2 * std::sqrt(kE) * L * L * eta * (st + r), 1e-14);

  auto d = stability_coefficients(StabilityCase::sgda_smooth, L, alpha, eta, t, n);
  const double E = std::exp(0.5 * alpha * alpha * t * eta * eta);
  EXPECT_NEAR(d.exp_factor, E, 1e-15);
  EXPECT_NEAR(d.c1, 4 * std::sqrt(kE) * L * L * eta * E * (1 + r), 1e-14);
  EXPECT_NEAR(d.c2, 8 * std::sqrt(kE) * L * L * eta * E * (1 + root), 1e-14);
  EXPECT_NEAR(d.at(0.01), d.c1 + d.c2 * std::log(100.0), 1e-13);
}

TEST(Coefficients, WorkedExamples) {
  EXPECT_EQ(stability_coefficients(StabilityCase::sgd_nonsmooth, 1, std::nullopt, 0.1, 0, 10).c1, 0.0);
  EXPECT_NEAR(stability_coefficients(StabilityCase::sgd_smooth, 1, 1.0, 0.1, 50, 100).c1, 0.2, 1e-15);
  const auto s = stability_coefficients(StabilityCase::sgda_smooth, 1, 1.0, 0.1, 100, 50);
  EXPECT_NEAR(s.exp_factor, std::exp(0.5), 1e-15);
  EXPECT_TRUE(std::isfinite(s.c1) && std::isfinite(s.c2));
}

TEST(Coefficients, MissingAlpha) {
  for (auto kind : {StabilityCase::sgd_smooth, StabilityCase::sgda_smooth}) {
    try {
      stability_coefficients(kind, 1, std::nullopt, 0.1, 10, 10);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::missing_alpha);
    }
  }
  EXPECT_EQ(parse_stability_case("sgda-smooth"), StabilityCase::sgda_smooth);
  EXPECT_EQ(stability_case(Algorithm::sgd, Regime::nonsmooth), StabilityCase::sgd_nonsmooth);
}

TEST(TrajectoryBound, PointMassAndFloor) {
  Trajectory pm{6, std::vector<PairIndex>(30, PairIndex{0, 1})};
  EXPECT_NEAR(trajectory_stability_bound(pm, StabilityCase::sgd_smooth, 2.0, 1.0, 0.05), 2 * 4 * 0.05 * 30, 1e-13);
  const auto traj = sample_trajectory(uniform_prior(6), 30, 1);
  EXPECT_GE(trajectory_stability_bound(traj, StabilityCase::sgd_nonsmooth, 2.0, std::nullopt, 0.05),
            2 * std::sqrt(kE) * 4 * 0.05 * std::sqrt(30.0));
}

TEST(TrajectoryBound, RecountOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto traj = sample_trajectory(uniform_prior(10), 100, seed);
    std::vector<int> c(10, 0);
    for (const auto& s : traj.steps) ++c[s.i], ++c[s.j];
    const double occ = *std::max_element(c.begin(), c.end());
    const double L = 1.5, eta = 0.01, alpha = 2.0;
    const double E = std::exp(0.5 * alpha * alpha * 100 * eta * eta);
    EXPECT_NEAR(trajectory_stability_bound(traj, StabilityCase::sgd_nonsmooth, L, std::nullopt, eta),
                2 * std::sqrt(kE) * L * L * eta * (10 + occ), 1e-13);
    EXPECT_NEAR(trajectory_stability_bound(traj, StabilityCase::sgd_smooth, L, alpha, eta), 2 * L * L * eta * occ,
                1e-13);
    EXPECT_NEAR(trajectory_stability_bound(traj, StabilityCase::sgda_nonsmooth, L, std::nullopt, eta),
                2 * std::sqrt(2 * kE) * L * L * eta * (10 + occ), 1e-13);
    EXPECT_NEAR(trajectory_stability_bound(traj, StabilityCase::sgda_smooth, L, alpha, eta),
                4 * std::sqrt(kE) * L * L * eta * E * (1 + occ), 1e-12);
  }
}

struct ProbeFixture {
  Dataset S = make_synthetic(GeneratorKind::gauss_linear, 50, 2, 0.5, 2);
  Objective obj = build_objective({}, S.feature_bound(), 1e9, {50, 0.05, 0.0, 0.0});
  Params init{Vec::Zero(2), Vec()};
  SampleSource src = SampleSource::generator(*S.provenance().generator);
};

TEST(Probe, IdenticalReplacementGivesZero) {
  ProbeFixture f;
  const auto traj = sample_trajectory(uniform_prior(50), 50, 3);
  const auto pairs = draw_probe_pairs(f.src, 100, 4);
  const auto res = stability_probe(f.S, {7, f.S[6]}, f.obj, f.init, 0.05, traj, pairs);
  EXPECT_EQ(res.beta_hat, 0.0);
  EXPECT_EQ(res.param_distance, 0.0);
  EXPECT_THROW(stability_probe(f.S, {7, f.S[6]}, f.obj, f.init, 0.05, traj, std::span(pairs).first(99)), Error);
}

TEST(Probe, BetaHatBelowLipschitzCertificate) {
  ProbeFixture f;
  Rng rng(5);
  const double L = f.obj.constants().L;
  for (int k = 0; k < 100; ++k) {
    const auto traj = sample_trajectory(uniform_prior(50), 50, 100 + k);
    const auto pairs = draw_probe_pairs(f.src, 100, 200 + k);
    const std::size_t idx = 1 + rng.below(50);
    const auto res = stability_probe(f.S, {idx, f.src.draw(rng)}, f.obj, f.init, 0.05, traj, pairs);
    EXPECT_LE(res.beta_hat, L * res.param_distance + 1e-12);
    EXPECT_NEAR(res.lipschitz_certificate, L * res.param_distance, 1e-12);
  }
}

TEST(TailCheck, SmoothSgdDominationAndPass) {
  ProbeFixture f;
  TailCheckSpec spec;
  spec.L = f.obj.constants().L;
  spec.alpha = f.obj.constants().alpha;
  spec.delta = 1.0 / 50;
  ASSERT_LE(spec.eta, 2.0 / *spec.alpha);
  ProbeSetup probe{&f.S, &f.obj, f.init, f.src, 100};
  const auto rep = tail_check(spec, 6, &probe);
  EXPECT_EQ(rep.trials.size(), 1000u);
  EXPECT_EQ(rep.domination_failures, 0u);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.tolerance, 0.02 + 3 * std::sqrt(0.02 * 0.98 / 1000), 1e-15);
  for (const auto& row : rep.trials) {
    EXPECT_LE(row.beta_hat, row.trajectory_bound);
    EXPECT_GE(row.neighbor_k, 1u);
  }
}

TEST(TailCheck, InflatedAndZeroedThresholds) {
  TailCheckSpec spec;
  spec.alpha = 1.0;
  spec.c2_scale = 10.0;
  const auto loose = tail_check(spec, 7);
  EXPECT_EQ(loose.bound_exceedances, 0u);
  EXPECT_FALSE(loose.probed);
  spec.c1_scale = spec.c2_scale = 0.0;
  const auto zero = tail_check(spec, 7);
  EXPECT_EQ(zero.bound_exceedances, 1000u);
  EXPECT_FALSE(zero.pass);
}

TEST(TailCheck, ParameterErrors) {
  TailCheckSpec spec;
  spec.alpha = 1.0;
  spec.delta = 0.5;
  try {
    tail_check(spec, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_delta);
  }
  spec.delta = 0.02;
  spec.n_trajectories = 999;
  EXPECT_THROW(tail_check(spec, 8), Error);
}

TEST(TailCheck, ParallelMatchesSerial) {
  TailCheckSpec spec;
  spec.kind = StabilityCase::sgd_nonsmooth;
  const auto a = tail_check(spec, 9, nullptr, 1);
  const auto b = tail_check(spec, 9, nullptr, 4);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t k = 0; k < a.trials.size(); ++k) EXPECT_EQ(a.trials[k].max_occupancy, b.trials[k].max_occupancy);
  EXPECT_EQ(a.bound_exceedances, b.bound_exceedances);
}

}  // namespace
}  // namespace pairstab
