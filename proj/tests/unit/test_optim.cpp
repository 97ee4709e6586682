#include <gtest/gtest.h>

#include <cmath>

#include "pairstab/analysis/risk.hpp"
#include "pairstab/error.hpp"
#include "pairstab/model.hpp"
#include "pairstab/optim.hpp"

namespace pairstab {
namespace {

Dataset scalar_dataset(std::vector<std::pair<double, double>> xy, double R_x) {
  std::vector<Sample> samples;
  for (auto [x, y] : xy) samples.push_back({Vec::Constant(1, x), y});
  return Dataset(std::move(samples), R_x, Provenance{});
}

Vec scalar(double x) { return Vec::Constant(1, x); }

TEST(SgdStep, SquareLossExample) {
  const auto S = scalar_dataset({{1, 1}, {0, 0}}, 1.0);
  PairwiseSquare loss(1.0, 1.0, 1.0);
  const auto next = sgd_step({scalar(0), 0, 0.1}, {0, 1}, S, loss);
  EXPECT_NEAR(next.w[0], 0.1, 1e-15);
  EXPECT_EQ(next.t, 1u);
}

TEST(SgdStep, FlatHingeIsFixedPoint) {
  const auto S = scalar_dataset({{1, 1}, {-1, 0}}, 1.0);
  PairwiseHinge loss(1.0, 5.0);
  const auto next = sgd_step({scalar(2), 0, 0.3}, {0, 1}, S, loss);
  EXPECT_EQ(next.w[0], 2.0);
}

TEST(SgdStep, ContractionTowardPairMinimiser) {
  // 1/2 (w dx - dy)^2 with dx = 1, dy = 0.5: w* = 0.5 and w' - w* = (1 - eta)(w - w*).
  const auto S = scalar_dataset({{1, 0.5}, {0, 0}}, 1.0);
  PairwiseSquare loss(1.0, 3.0, 1.0);
  for (double eta : {0.1, 0.5, 1.0, 1.5, 2.0}) {
    SgdState s{scalar(-1.5), 0, eta};
    double prev = std::abs(s.w[0] - 0.5);
    for (int k = 0; k < 2; ++k) {
      s = sgd_step(s, {0, 1}, S, loss);
      const double dist = std::abs(s.w[0] - 0.5);
      EXPECT_LE(dist, prev + 1e-15);
      EXPECT_NEAR(dist, std::abs(1 - eta) * prev, 1e-14);
      prev = dist;
    }
  }
}

TEST(SgdStep, LeavingTheDomainThrows) {
  const auto S = scalar_dataset({{1, 1}, {0, 0}}, 1.0);
  PairwiseSquare loss(1.0, 0.05, 1.0);
  try {
    sgd_step({scalar(0), 0, 0.1}, {0, 1}, S, loss);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain_violation);
  }
}

// Scalars x = 2 and 0 give u = (x - x~)/2 = 1, so the unregularised saddle
// is exactly w v.
TEST(SgdaStep, PureBilinearExample) {
  const auto S = scalar_dataset({{2, 0}, {0, 0}}, 2.0);
  BilinearSaddle loss(2.0, 10.0, 10.0, 0.0, 0.0);
  const auto next = sgda_step({scalar(1), scalar(0), 0, 0.1}, {0, 1}, S, loss);
  EXPECT_NEAR(next.w[0], 1.0, 1e-15);
  EXPECT_NEAR(next.v[0], 0.1, 1e-15);
}

TEST(SgdaStep, RotationDilationIdentity) {
  const auto S = scalar_dataset({{2, 0}, {0, 0}}, 2.0);
  BilinearSaddle loss(2.0, 10.0, 10.0, 0.0, 0.0);
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const double eta = 0.01 + 0.2 * rng.uniform();
    SgdaState s{scalar(2 * rng.uniform() - 1), scalar(2 * rng.uniform() - 1), 0, eta};
    const double before = s.w.squaredNorm() + s.v.squaredNorm();
    const auto next = sgda_step(s, {k % 2 ? 0u : 1u, k % 2 ? 1u : 0u}, S, loss);
    EXPECT_NEAR(next.w.squaredNorm() + next.v.squaredNorm(), (1 + eta * eta) * before, 1e-14);
    // Simultaneous, not alternating: w' uses the old v.
    EXPECT_NEAR(next.w[0], s.w[0] - eta * s.v[0], 1e-15);
    EXPECT_NEAR(next.v[0], s.v[0] + eta * s.w[0], 1e-15);
  }
}

TEST(SgdaStep, ZeroGradientFixedPoint) {
  const auto S = scalar_dataset({{2, 0}, {0, 0}}, 2.0);
  BilinearSaddle loss(2.0, 10.0, 10.0, 0.3, 0.3);
  const auto next = sgda_step({scalar(0), scalar(0), 0, 0.1}, {0, 1}, S, loss);
  EXPECT_EQ(next.w[0], 0.0);
  EXPECT_EQ(next.v[0], 0.0);
}

struct LogisticSetup {
  Dataset S = make_synthetic(GeneratorKind::gauss_linear, 64, 3, 1.0, 5);
  std::size_t T = 64;
  double eta = 0.125;
  Objective obj = build_objective({}, S.feature_bound(), 1e9, {T, eta, 0.0, 0.0});
  Params init{Vec::Zero(3), Vec()};
};

TEST(SgdRun, SingleStepMatchesStep) {
  LogisticSetup f;
  const auto rec = run(f.S, f.obj, f.eta, 1, {}, f.init, 7);
  ASSERT_EQ(rec.steps(), 1u);
  const auto direct = sgd_step({f.init.w, 0, f.eta}, rec.trajectory.steps[0], f.S, f.obj.pairwise());
  EXPECT_EQ(rec.final_params.w, direct.w);
  EXPECT_THROW(run(f.S, f.obj, f.eta, 0, {}, f.init, 7), Error);
}

TEST(SgdRun, DeterministicAndReplayable) {
  LogisticSetup f;
  SamplingScheme scheme{SchemeKind::loss_proportional, 0.2, 4, nullptr};
  const auto a = run(f.S, f.obj, f.eta, f.T, scheme, f.init, 9);
  const auto b = run(f.S, f.obj, f.eta, f.T, scheme, f.init, 9);
  EXPECT_EQ(a.final_params.w, b.final_params.w);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.step_kl, b.step_kl);
  EXPECT_EQ(replay(a, f.S, f.obj).w, a.final_params.w);
  EXPECT_GT(a.kl(), 0.0);
  const auto c = run(f.S, f.obj, f.eta, f.T, scheme, f.init, 10);
  EXPECT_NE(a.trajectory, c.trajectory);
}

TEST(SgdRun, UniformSchemeHasZeroKlAndDrawsTheTrajectoryStream) {
  LogisticSetup f;
  const auto rec = run(f.S, f.obj, f.eta, f.T, {}, f.init, 11);
  EXPECT_EQ(rec.kl(), 0.0);
  EXPECT_EQ(rec.renyi6().value(), 1.0);
  EXPECT_EQ(rec.trajectory, sample_trajectory(uniform_prior(64), f.T, trajectory_seed(11)));
}

TEST(SgdRun, AverageAndParameterTravel) {
  LogisticSetup f;
  const auto rec = run(f.S, f.obj, f.eta, f.T, {}, f.init, 12);
  // Recompute the running average independently.
  SgdState s{f.init.w, 0, f.eta};
  Vec sum = Vec::Zero(3);
  for (const auto& pair : rec.trajectory.steps) {
    s = sgd_step(s, pair, f.S, f.obj.pairwise());
    sum += s.w;
  }
  EXPECT_LE((rec.averaged.w - sum / static_cast<double>(f.T)).norm(), 1e-12);
  EXPECT_LE(rec.final_params.w.norm(), f.T * f.eta * f.obj.constants().L_w);
}

TEST(SgdRun, DescentOnGaussLinear) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 256, 5, 1.0, 13);
  const auto r = recipe(Algorithm::sgd, Regime::smooth, 256, 1.0);
  const auto obj = build_objective({}, S.feature_bound(), 1e9, {r.T, r.eta, 0.0, 0.0});
  const Params init{Vec::Zero(5), Vec()};
  RunOptions opts;
  opts.smooth_analysis = true;
  const auto rec = run(S, obj, r.eta, r.T, {}, init, 14, opts);
  EXPECT_LT(empirical_risk_u(rec.final_params, S, obj), empirical_risk_u(init, S, obj));
}

TEST(SgdRun, StepBudgetErrors) {
  LogisticSetup f;
  const Params far{Vec::Constant(3, 1.0), Vec()};
  try {
    check_step_budget(f.obj, far, f.eta, f.T, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::config_error);
  }
  // alpha = R_x^2/4 for logistic, so eta = 1 breaks eta <= 2/alpha here.
  const Objective wide(std::make_shared<PairwiseLogistic>(f.S.feature_bound(), 1e6));
  EXPECT_NO_THROW(check_step_budget(wide, f.init, 1.0, 10, false));
  EXPECT_THROW(check_step_budget(wide, f.init, 1.0, 10, true), Error);
}

TEST(SgdaRun, RegularisedSaddleDistanceShrinks) {
  Rng rng(15);
  std::vector<std::pair<double, double>> xy;
  for (int k = 0; k < 40; ++k) xy.push_back({rng.uniform() - 0.5, 0.0});
  const auto S = scalar_dataset(xy, 0.5);
  const double eta = 0.003;
  const std::size_t T = 100;
  LossSpec spec;
  spec.name = "bilinear";
  spec.lambda_w = spec.lambda_v = 2.0;
  const Params init{scalar(0.5), scalar(-0.5)};
  const auto obj = build_objective(spec, 0.5, 0.0, {T, eta, 0.5, 0.5});
  const auto a = run(S, obj, eta, T, {}, init, 16);
  const auto b = run(S, obj, eta, T, {}, init, 16);
  EXPECT_EQ(a.final_params.w, b.final_params.w);
  EXPECT_EQ(a.final_params.v, b.final_params.v);
  // The saddle is the origin; regularisation pulls both blocks in by about
  // exp(-lambda T eta) = 0.55.
  const Params origin{scalar(0), scalar(0)};
  EXPECT_LT(joint_distance(a.final_params, origin), 0.7 * joint_distance(init, origin));
  const auto one = run(S, obj, eta, 1, {}, init, 17);
  const auto step = sgda_step({init.w, init.v, 0, eta}, one.trajectory.steps[0], S, obj.minimax());
  EXPECT_EQ(one.final_params.w, step.w);
  EXPECT_EQ(one.final_params.v, step.v);
}

TEST(Recipe, TableExamples) {
  const auto smooth = recipe(Algorithm::sgd, Regime::smooth, 100, 1.0);
  EXPECT_EQ(smooth.T, 100u);
  EXPECT_NEAR(smooth.eta, 0.1, 1e-15);
  const auto nonsmooth = recipe(Algorithm::sgd, Regime::nonsmooth, 100, 1.0);
  EXPECT_EQ(nonsmooth.T, 10000u);
  EXPECT_NEAR(nonsmooth.eta, 1e-3, 1e-15);
  const auto doubled = recipe(Algorithm::sgda, Regime::smooth, 100, 2.0);
  EXPECT_EQ(doubled.T, 200u);
  EXPECT_NEAR(doubled.eta, 2.0 / std::sqrt(200.0), 1e-15);
  const auto doubled_ns = recipe(Algorithm::sgda, Regime::nonsmooth, 100, 2.0);
  EXPECT_EQ(doubled_ns.T, 20000u);
  EXPECT_NEAR(doubled_ns.eta, 2.0 * std::pow(20000.0, -0.75), 1e-15);
  EXPECT_THROW(recipe(Algorithm::sgd, Regime::smooth, 1, 1.0), Error);
  EXPECT_THROW(recipe(Algorithm::sgd, Regime::smooth, 10, 0.0), Error);
  // 0.07 * 100 is 7.000000000000001 in binary; T must still be 7.
  EXPECT_EQ(recipe(Algorithm::sgd, Regime::smooth, 100, 0.07).T, 7u);
}

TEST(RunRecordFile, RoundTripIsBitExact) {
  LogisticSetup f;
  SamplingScheme scheme{SchemeKind::gradnorm_proportional, 0.3, 2, nullptr};
  RunOptions opts;
  opts.config_hash = 0xdeadbeef12345678ULL;
  const auto rec = run(f.S, f.obj, f.eta, 20, scheme, f.init, 18, opts);
  const auto text = format_run_record(rec);
  const auto back = parse_run_record(text);
  EXPECT_EQ(format_run_record(back), text);
  EXPECT_EQ(back.final_params.w, rec.final_params.w);
  EXPECT_EQ(back.trajectory, rec.trajectory);
  EXPECT_EQ(back.step_kl, rec.step_kl);
  EXPECT_EQ(back.config_hash, rec.config_hash);
  EXPECT_EQ(back.kl(), rec.kl());
  EXPECT_EQ(replay(back, f.S, f.obj).w, rec.final_params.w);
}

TEST(RunRecordFile, MalformedInputs) {
  LogisticSetup f;
  const auto text = format_run_record(run(f.S, f.obj, f.eta, 5, {}, f.init, 19));
  auto code_of = [](const std::string& s) {
    try {
      parse_run_record(s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::invalid_parameter;
  };
  EXPECT_EQ(code_of(text.substr(0, text.size() - 10)), ErrorCode::malformed_file);
  EXPECT_EQ(code_of(""), ErrorCode::malformed_file);
  std::string bad = text;
  bad.replace(bad.find("format = pairstab-run-1"), 23, "format = other");
  EXPECT_EQ(code_of(bad), ErrorCode::malformed_file);
}

}  // namespace
}  // namespace pairstab
