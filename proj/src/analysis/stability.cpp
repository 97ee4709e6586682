#include "pairstab/analysis/stability.hpp"

#include <algorithm>
#include <cmath>

#include "pairstab/error.hpp"
#include "pairstab/parallel.hpp"

namespace pairstab {

std::string_view to_string(StabilityCase c) {
  switch (c) {
    case StabilityCase::sgd_nonsmooth: return "sgd-nonsmooth";
    case StabilityCase::sgd_smooth: return "sgd-smooth";
    case StabilityCase::sgda_nonsmooth: return "sgda-nonsmooth";
    case StabilityCase::sgda_smooth: return "sgda-smooth";
  }
  return "?";
}

StabilityCase parse_stability_case(std::string_view name) {
  for (auto c : {StabilityCase::sgd_nonsmooth, StabilityCase::sgd_smooth, StabilityCase::sgda_nonsmooth,
                 StabilityCase::sgda_smooth}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::invalid_parameter, "unknown stability case '" + std::string(name) + "'");
}

StabilityCase stability_case(Algorithm algorithm, Regime regime) {
  if (algorithm == Algorithm::sgd) {
    return regime == Regime::smooth ? StabilityCase::sgd_smooth : StabilityCase::sgd_nonsmooth;
  }
  return regime == Regime::smooth ? StabilityCase::sgda_smooth : StabilityCase::sgda_nonsmooth;
}

bool is_smooth(StabilityCase c) { return c == StabilityCase::sgd_smooth || c == StabilityCase::sgda_smooth; }

double StabilityCoefficients::at(double delta) const {
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_delta, "delta must lie in (0, 1)");
  return c1 + c2 * std::log(1.0 / delta);
}

namespace {

const double kSqrtE = std::sqrt(std::exp(1.0));
const double kSqrt2E = std::sqrt(2.0 * std::exp(1.0));

void check_inputs(StabilityCase kind, double L, const std::optional<double>& alpha, double eta) {
  require(std::isfinite(L) && L >= 0.0, ErrorCode::invalid_parameter, "L must be finite and >= 0");
  require(std::isfinite(eta) && eta >= 0.0, ErrorCode::invalid_parameter, "eta must be finite and >= 0");
  if (kind == StabilityCase::sgda_smooth) {
    require(alpha.has_value(), ErrorCode::missing_alpha, "sgda-smooth needs the smoothness constant alpha");
    require(std::isfinite(*alpha) && *alpha >= 0.0, ErrorCode::invalid_parameter, "alpha must be finite and >= 0");
  }
  if (kind == StabilityCase::sgd_smooth) {
    require(alpha.has_value(), ErrorCode::missing_alpha, "sgd-smooth needs the smoothness constant alpha");
  }
}

double sgda_exp_factor(double alpha, std::size_t t, double eta) {
  return std::exp(0.5 * alpha * alpha * static_cast<double>(t) * eta * eta);
}

}  // namespace

StabilityCoefficients stability_coefficients(StabilityCase kind, double L, std::optional<double> alpha, double eta,
                                             std::size_t t, std::size_t n) {
  check_inputs(kind, L, alpha, eta);
  require(n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  StabilityCoefficients c;
  c.kind = kind;
  c.L = L;
  c.alpha = alpha;
  c.eta = eta;
  c.t = t;
  c.n = n;
  const double base = L * L * eta;
  const double td = static_cast<double>(t);
  const double ratio = td / static_cast<double>(n);
  const double root = std::sqrt(2.0 * ratio);
  switch (kind) {
    case StabilityCase::sgd_nonsmooth:
      c.c1 = 2.0 * kSqrtE * base * (std::sqrt(td) + 2.0 * ratio);
      c.c2 = 4.0 * kSqrtE * base * (1.0 + root);
      c.alt_c1 = c.c1;
      c.alt_c2 = c.c2;
      break;
    case StabilityCase::sgd_smooth:
      c.c1 = 4.0 * base * ratio;
      c.c2 = 4.0 * base * (1.0 + root);
      c.alt_c1 = c.c1;
      c.alt_c2 = 4.0 * base * (1.0 + 2.0 * std::sqrt(ratio));
      c.variant_note = "c2 uses 1+sqrt(2t/n); alt_c2 is the 1+2sqrt(t/n) variant";
      break;
    case StabilityCase::sgda_nonsmooth:
      c.c1 = 2.0 * kSqrt2E * base * (std::sqrt(td) + 2.0 * ratio);
      c.c2 = 4.0 * kSqrt2E * base * (1.0 + root);
      c.alt_c1 = 2.0 * kSqrtE * base * (std::sqrt(td) + 2.0 * ratio);
      c.alt_c2 = c.c2;
      c.variant_note = "c1 uses 2sqrt(2e); alt_c1 is the 2sqrt(e) variant";
      break;
    case StabilityCase::sgda_smooth:
      c.exp_factor = sgda_exp_factor(*alpha, t, eta);
      c.c1 = 4.0 * kSqrtE * base * c.exp_factor * (1.0 + 2.0 * ratio);
      c.c2 = 8.0 * kSqrtE * base * c.exp_factor * (1.0 + root);
      c.alt_c1 = c.c1;
      c.alt_c2 = c.c2;
      break;
  }
  return c;
}

double trajectory_stability_bound(std::size_t t, std::size_t max_occ, StabilityCase kind, double L,
                                  std::optional<double> alpha, double eta) {
  check_inputs(kind, L, alpha, eta);
  const double base = L * L * eta;
  const double occ = static_cast<double>(max_occ);
  const double root_t = std::sqrt(static_cast<double>(t));
  switch (kind) {
    case StabilityCase::sgd_nonsmooth: return 2.0 * kSqrtE * base * (root_t + occ);
    case StabilityCase::sgd_smooth: return 2.0 * base * occ;
    case StabilityCase::sgda_nonsmooth: return 2.0 * kSqrt2E * base * (root_t + occ);
    case StabilityCase::sgda_smooth: return 4.0 * kSqrtE * base * sgda_exp_factor(*alpha, t, eta) * (1.0 + occ);
  }
  return 0.0;
}

double trajectory_stability_bound(const Trajectory& traj, StabilityCase kind, double L, std::optional<double> alpha,
                                  double eta) {
  require(traj.length() >= 1, ErrorCode::invalid_parameter, "trajectory is empty");
  return trajectory_stability_bound(traj.length(), max_occupancy(traj), kind, L, alpha, eta);
}

std::vector<ProbePair> draw_probe_pairs(const SampleSource& source, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProbePair> pairs;
  pairs.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    Sample z = source.draw(rng);
    Sample zt = source.draw(rng);
    pairs.emplace_back(std::move(z), std::move(zt));
  }
  return pairs;
}

ProbeResult stability_probe(const Dataset& S, const NeighborSpec& spec, const Objective& objective,
                            const Params& init, double eta, const Trajectory& traj,
                            std::span<const ProbePair> probe_pairs) {
  require(probe_pairs.size() >= 100, ErrorCode::invalid_parameter, "stability probe needs m_probe >= 100");
  require(traj.n == S.size(), ErrorCode::config_error, "trajectory and dataset disagree on n");
  const Dataset S_prime = neighbor(S, spec);
  const Params a = follow_trajectory(traj, S, objective, init, eta);
  const Params b = follow_trajectory(traj, S_prime, objective, init, eta);

  ProbeResult r;
  for (const auto& [z, zt] : probe_pairs) {
    r.beta_hat = std::max(r.beta_hat, std::abs(objective.value(a, z, zt) - objective.value(b, z, zt)));
  }
  r.param_distance = joint_distance(a, b);
  const LossConstants& c = objective.constants();
  if (objective.is_minimax()) {
    r.lipschitz_certificate = c.L_w * (a.w - b.w).norm() + c.L_v * (a.v - b.v).norm();
  } else {
    r.lipschitz_certificate = c.L * (a.w - b.w).norm();
  }
  return r;
}

StabilityReport tail_check(const TailCheckSpec& spec, std::uint64_t seed, const ProbeSetup* probe, unsigned jobs) {
  require(spec.n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  require(spec.t >= 1, ErrorCode::invalid_parameter, "t must be >= 1");
  require(spec.delta > 0.0 && spec.delta <= 1.0 / static_cast<double>(spec.n) && spec.delta < 1.0,
          ErrorCode::invalid_delta, "delta must lie in (0, 1/n]");
  require(spec.n_trajectories >= 1000, ErrorCode::invalid_parameter, "tail check needs n_trajectories >= 1000");
  require(spec.c1_scale >= 0.0 && spec.c2_scale >= 0.0, ErrorCode::invalid_parameter,
          "coefficient scales must be >= 0");
  if (probe != nullptr) {
    require(probe->S != nullptr && probe->objective != nullptr, ErrorCode::invalid_parameter,
            "probe setup lacks a dataset or loss");
    require(probe->S->size() == spec.n, ErrorCode::config_error, "probe dataset size differs from n");
    require(probe->m_probe >= 100, ErrorCode::invalid_parameter, "m_probe must be >= 100");
  }

  StabilityReport rep;
  rep.spec = spec;
  rep.coeffs = stability_coefficients(spec.kind, spec.L, spec.alpha, spec.eta, spec.t, spec.n);
  rep.threshold = spec.c1_scale * rep.coeffs.c1 + spec.c2_scale * rep.coeffs.c2 * std::log(1.0 / spec.delta);
  rep.probed = probe != nullptr;
  rep.trials.resize(spec.n_trajectories);

  const StepDistribution prior = uniform_prior(spec.n);
  parallel_for(spec.n_trajectories, jobs, [&](std::size_t k) {
    const Trajectory traj = sample_trajectory(prior, spec.t, derive_seed(seed, "trajectory", k));
    TrialRow& row = rep.trials[k];
    row.max_occupancy = max_occupancy(traj);
    row.trajectory_bound =
        trajectory_stability_bound(spec.t, row.max_occupancy, spec.kind, spec.L, spec.alpha, spec.eta);
    if (probe == nullptr) return;
    Rng rng(derive_seed(seed, "neighbor", k));
    NeighborSpec nb;
    nb.k = static_cast<std::size_t>(rng.below(spec.n)) + 1;
    nb.replacement = probe->source.draw(rng);
    const auto pairs = draw_probe_pairs(probe->source, probe->m_probe, derive_seed(seed, "probe", k));
    const auto result = stability_probe(*probe->S, nb, *probe->objective, probe->init, spec.eta, traj, pairs);
    row.neighbor_k = nb.k;
    row.beta_hat = result.beta_hat;
    row.param_distance = result.param_distance;
    row.lipschitz_certificate = result.lipschitz_certificate;
  });

  for (const auto& row : rep.trials) {
    if (row.trajectory_bound > rep.threshold) ++rep.bound_exceedances;
    if (rep.probed && row.beta_hat > rep.threshold) ++rep.probe_exceedances;
    if (rep.probed && row.beta_hat > row.trajectory_bound) ++rep.domination_failures;
  }
  const double N = static_cast<double>(spec.n_trajectories);
  rep.bound_frequency = static_cast<double>(rep.bound_exceedances) / N;
  rep.probe_frequency = static_cast<double>(rep.probe_exceedances) / N;
  rep.tolerance = spec.delta + 3.0 * std::sqrt(spec.delta * (1.0 - spec.delta) / N);
  rep.pass = rep.bound_frequency <= rep.tolerance && rep.probe_frequency <= rep.tolerance;
  return rep;
}

}  // namespace pairstab
