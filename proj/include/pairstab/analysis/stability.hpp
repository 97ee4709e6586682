#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pairstab/analysis/risk.hpp"
#include "pairstab/data.hpp"
#include "pairstab/losses.hpp"
#include "pairstab/optim.hpp"
#include "pairstab/sampling.hpp"

namespace pairstab {

enum class StabilityCase { sgd_nonsmooth, sgd_smooth, sgda_nonsmooth, sgda_smooth };

std::string_view to_string(StabilityCase c);
StabilityCase parse_stability_case(std::string_view name);
StabilityCase stability_case(Algorithm algorithm, Regime regime);
bool is_smooth(StabilityCase c);

/// beta_phi <= c1 + c2 log(1/delta) with probability >= 1 - delta.
///
///   sgd-nonsmooth   c1 = 2 sqrt(e) L^2 eta (sqrt t + 2t/n)
///                   c2 = 4 sqrt(e) L^2 eta (1 + sqrt(2t/n))
///   sgd-smooth      c1 = 4 L^2 eta t / n
///                   c2 = 4 L^2 eta (1 + sqrt(2t/n))
///   sgda-nonsmooth  c1 = 2 sqrt(2e) L^2 eta (sqrt t + 2t/n)
///                   c2 = 4 sqrt(2e) L^2 eta (1 + sqrt(2t/n))
///   sgda-smooth     c1 = 4 sqrt(e) L^2 eta E (1 + 2t/n)
///                   c2 = 8 sqrt(e) L^2 eta E (1 + sqrt(2t/n)),  E = exp(alpha^2 t eta^2 / 2)
///
/// alt_c1 / alt_c2 hold the competing published variant where one exists
/// (sgd-smooth c2 = 4 L^2 eta (1 + 2 sqrt(t/n)); sgda-nonsmooth
/// c1 = 2 sqrt(e) L^2 eta (sqrt t + 2t/n)); elsewhere they equal c1 / c2.
struct StabilityCoefficients {
  double c1 = 0.0;
  double c2 = 0.0;
  StabilityCase kind = StabilityCase::sgd_smooth;
  double L = 0.0;
  std::optional<double> alpha;
  double eta = 0.0;
  std::size_t t = 0;
  std::size_t n = 2;
  double exp_factor = 1.0;  // E for sgda-smooth, 1 otherwise
  double alt_c1 = 0.0;
  double alt_c2 = 0.0;
  std::string variant_note;

  double at(double delta) const;  // c1 + c2 log(1/delta)
};

StabilityCoefficients stability_coefficients(StabilityCase kind, double L, std::optional<double> alpha, double eta,
                                             std::size_t t, std::size_t n);

/// Deterministic bound on beta_phi given the trajectory (t = its length):
///   sgd-nonsmooth   2 sqrt(e) L^2 eta (sqrt t + occ)
///   sgd-smooth      2 L^2 eta occ
///   sgda-nonsmooth  2 sqrt(2e) L^2 eta (sqrt t + occ)
///   sgda-smooth     4 sqrt(e) L^2 eta E (1 + occ)
/// with occ = max_occupancy(traj).
double trajectory_stability_bound(const Trajectory& traj, StabilityCase kind, double L, std::optional<double> alpha,
                                  double eta);
double trajectory_stability_bound(std::size_t t, std::size_t max_occ, StabilityCase kind, double L,
                                  std::optional<double> alpha, double eta);

using ProbePair = std::pair<Sample, Sample>;

std::vector<ProbePair> draw_probe_pairs(const SampleSource& source, std::size_t m, std::uint64_t seed);

struct ProbeResult {
  double beta_hat = 0.0;        // max over probe pairs of |l(A(S)) - l(A(S'))|
  double param_distance = 0.0;  // joint ||A(S) - A(S')||
  // L_w ||dw|| + L_v ||dv||: an upper bound on the sup over all pairs.
  double lipschitz_certificate = 0.0;
};

// Replays `traj` from `init` on S and on neighbor(S, spec) and compares the
// final parameters on the probe pairs (at least 100).
ProbeResult stability_probe(const Dataset& S, const NeighborSpec& spec, const Objective& objective,
                            const Params& init, double eta, const Trajectory& traj,
                            std::span<const ProbePair> probe_pairs);

struct TailCheckSpec {
  StabilityCase kind = StabilityCase::sgd_smooth;
  std::size_t n = 50;
  std::size_t t = 50;
  double eta = 0.05;
  double L = 1.0;
  std::optional<double> alpha;
  double delta = 0.02;
  std::size_t n_trajectories = 1000;
  double c1_scale = 1.0;
  double c2_scale = 1.0;
};

// Optional probing: each trial also replays its trajectory on S and on a
// random neighbour and records beta-hat.
struct ProbeSetup {
  const Dataset* S = nullptr;
  const Objective* objective = nullptr;
  Params init;
  SampleSource source = SampleSource::generator({});
  std::size_t m_probe = 100;
};

struct TrialRow {
  std::size_t max_occupancy = 0;
  double trajectory_bound = 0.0;
  std::size_t neighbor_k = 0;  // 1-based; 0 when not probed
  double beta_hat = 0.0;
  double param_distance = 0.0;
  double lipschitz_certificate = 0.0;
};

struct StabilityReport {
  TailCheckSpec spec;
  StabilityCoefficients coeffs;
  double threshold = 0.0;  // c1_scale c1 + c2_scale c2 log(1/delta)
  bool probed = false;
  std::vector<TrialRow> trials;
  std::size_t bound_exceedances = 0;
  std::size_t probe_exceedances = 0;
  std::size_t domination_failures = 0;  // beta-hat above the trajectory bound
  double bound_frequency = 0.0;
  double probe_frequency = 0.0;
  double tolerance = 0.0;  // delta + 3 sqrt(delta (1 - delta) / N)
  bool pass = false;
};

// Draws n_trajectories uniform trajectories of length t and counts how often
// the trajectory bound (and beta-hat, when probing) exceeds the threshold.
StabilityReport tail_check(const TailCheckSpec& spec, std::uint64_t seed, const ProbeSetup* probe = nullptr,
                           unsigned jobs = 1);

}  // namespace pairstab
