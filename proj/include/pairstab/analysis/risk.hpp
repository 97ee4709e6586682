#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pairstab/data.hpp"
#include "pairstab/losses.hpp"
#include "pairstab/optim.hpp"
#include "pairstab/sampling.hpp"

namespace pairstab {

// q(i, j) on 0-based indices.
using PairKernel = std::function<double(std::size_t, std::size_t)>;

// 1/(n(n-1)) sum_{i != j} q(i, j).
double u_statistic(std::size_t n, const PairKernel& q);

double empirical_risk_u(const Params& p, const Dataset& S, const Objective& objective);

// (1/floor(n/2)) sum_{i < floor(n/2)} q(sigma(i), sigma(floor(n/2) + i)).
double block_risk(std::size_t n, const PairKernel& q, std::span<const std::size_t> sigma);
double block_risk(const Params& p, const Dataset& S, const Objective& objective, std::span<const std::size_t> sigma);

// max |mean over all n! permutations of block_risk - u_statistic|. Rejects
// n > 8.
double block_risk_identity_check(std::size_t n, const PairKernel& q);
double block_risk_identity_check(const Params& p, const Dataset& S, const Objective& objective);

/// The distribution D pairs are drawn from on the population side: either
/// the synthetic generator or the empirical distribution of a dataset
/// (uniform indices with replacement, i = j allowed).
class SampleSource {
 public:
  static SampleSource generator(const GeneratorSpec& spec);
  static SampleSource empirical(const Dataset& S);

  Sample draw(Rng& rng) const;
  bool is_generator() const { return spec_.has_value(); }
  const std::optional<GeneratorSpec>& spec() const { return spec_; }

 private:
  std::optional<GeneratorSpec> spec_;
  const Dataset* dataset_ = nullptr;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  // Set when the source's generator differs from the dataset's recorded
  // provenance (a warning, not an error).
  bool provenance_mismatch = false;
};

// Mean of l(p; z, z~) over m independent fresh pairs from `source`.
McEstimate population_risk_mc(const Params& p, const SampleSource& source, const Objective& objective,
                              std::size_t m, std::uint64_t seed);

struct GapEstimate {
  double gap = 0.0;  // population - empirical
  double population = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  bool provenance_mismatch = false;
};

GapEstimate generalization_gap(const Params& final_params, const Dataset& S, const Objective& objective,
                               const SampleSource& source, std::size_t m, std::uint64_t seed);
GapEstimate generalization_gap(const RunRecord& run, const Dataset& S, const Objective& objective,
                               const SampleSource& source, std::size_t m, std::uint64_t seed);

/// One training configuration on a fixed S; trajectories vary with the seed.
struct RunSpec {
  double eta = 0.0;
  std::size_t T = 1;
  SamplingScheme scheme;
  Params init;
  RunOptions options;
};

struct GapOverQ {
  double mean = 0.0;
  double std_error = 0.0;
  double mean_kl = 0.0;          // path KL averaged over the drawn trajectories
  // log of the mean path Renyi-6 moment (mean taken before the log).
  double log_mean_renyi6 = 0.0;
  std::vector<GapEstimate> runs;
  std::vector<double> run_kl;
  std::vector<double> run_log_renyi6;
};

// Averages generalization_gap over n_trajectories runs drawn from the
// configured scheme; run k uses seeds derived from (seed, k).
GapOverQ expected_gap_over_Q(const Dataset& S, const Objective& objective, const RunSpec& spec,
                             const SampleSource& source, std::size_t n_trajectories, std::size_t m,
                             std::uint64_t seed, unsigned jobs = 1);

}  // namespace pairstab
