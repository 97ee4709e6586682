#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairstab/data.hpp"
#include "pairstab/losses.hpp"
#include "pairstab/rng.hpp"

namespace pairstab {

/// One draw phi_t = (i_t, j_t), i != j. 0-based.
struct PairIndex {
  std::size_t i = 0;
  std::size_t j = 1;

  bool operator==(const PairIndex&) const = default;
};

struct Trajectory {
  std::size_t n = 2;
  std::vector<PairIndex> steps;

  std::size_t length() const { return steps.size(); }
  bool operator==(const Trajectory&) const = default;
};

/// Categorical distribution over the n(n-1) ordered off-diagonal pairs.
/// The uniform distribution is stored implicitly.
class StepDistribution {
 public:
  static StepDistribution uniform(std::size_t n);
  // `weights` is an n*n row-major table of unnormalised nonnegative weights
  // with a zero diagonal.
  static StepDistribution from_weights(std::size_t n, std::vector<double> weights);

  std::size_t n() const { return n_; }
  std::size_t support_size() const { return n_ * (n_ - 1); }
  bool is_uniform() const { return uniform_; }
  double prob(std::size_t i, std::size_t j) const;
  // Dense n*n row-major copy (materialised for the uniform case too).
  std::vector<double> table() const;

  PairIndex sample(Rng& rng) const;

 private:
  StepDistribution(std::size_t n, bool uniform) : n_(n), uniform_(uniform) {}

  std::size_t n_;
  bool uniform_;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

enum class SchemeKind { uniform_prior, loss_proportional, gradnorm_proportional, custom_table };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view name);

/// How the posterior Q picks pairs. Adaptive kinds mix a fraction eps of the
/// uniform prior into the score-proportional distribution, which keeps Q
/// absolutely continuous w.r.t. P with bounded density ratio.
struct SamplingScheme {
  SchemeKind kind = SchemeKind::uniform_prior;
  double eps = 0.1;
  std::size_t refresh_period = 1;
  std::shared_ptr<const StepDistribution> table;  // custom-table only

  bool adaptive() const {
    return kind == SchemeKind::loss_proportional || kind == SchemeKind::gradnorm_proportional;
  }
  void validate(std::size_t n) const;
};

StepDistribution uniform_prior(std::size_t n);

// (1 - eps) * score / sum(score) + eps / (n(n-1)); uniform when all scores
// vanish or eps == 1. eps may be 0 here.
StepDistribution mix_with_uniform(std::size_t n, std::span<const double> scores, double eps);

/// Step distribution the scheme uses at parameters `state`. O(n^2 d) for the
/// adaptive kinds.
StepDistribution adaptive_step(const SamplingScheme& scheme, const Params& state, const Dataset& S,
                               const Objective& objective);

Trajectory sample_trajectory(std::span<const StepDistribution> per_step, std::uint64_t seed);
Trajectory sample_trajectory(const StepDistribution& every_step, std::size_t T, std::uint64_t seed);

double kl_step(const StepDistribution& Q, const StepDistribution& P);
double kl_trajectory(std::span<const StepDistribution> Q_steps, std::span<const StepDistribution> P_steps);

/// E_P[(Q/P)^6], kept in log space since products over long trajectories
/// overflow quickly.
struct RenyiMoment {
  double log_value = 0.0;

  double value() const;
  bool overflow() const;
  static RenyiMoment from_value(double value);
};

// log of sum_x Q(x)^6 / P(x)^5 for a single step.
double log_renyi6_step(const StepDistribution& Q, const StepDistribution& P);
RenyiMoment renyi_moment6(std::span<const StepDistribution> Q_steps, std::span<const StepDistribution> P_steps);

// Number of steps touching index k (1-based), in either slot.
std::size_t occupancy(const Trajectory& traj, std::size_t k);
// occupancy(traj, k) for k = 1..n, over the first `t` steps.
std::vector<std::size_t> occupancy_counts(const Trajectory& traj, std::size_t t);
std::size_t max_occupancy(const Trajectory& traj);
std::size_t max_occupancy(const Trajectory& traj, std::size_t t);

// 2t/n + log(n/delta) + 2 sqrt((t/n) log(n/delta)): with probability 1 - delta
// every index's occupancy after t uniform steps stays below this.
double chernoff_occupancy_bound(std::size_t t, std::size_t n, double delta);

// Lines `i j weight` (1-based, unnormalised), normalised on load.
StepDistribution parse_custom_table(std::string_view contents, std::size_t n);
StepDistribution load_custom_table(const std::string& path, std::size_t n);

}  // namespace pairstab
