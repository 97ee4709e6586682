#include "pairstab/analysis/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pairstab/error.hpp"
#include "pairstab/parallel.hpp"

namespace pairstab {

// Accumulates deviations from the first kernel value so a constant kernel
// averages to itself exactly; Kahan-compensated.
double u_statistic(std::size_t n, const PairKernel& q) {
  require(n >= 2, ErrorCode::invalid_parameter, "U-statistic needs n >= 2");
  const double base = q(0, 1);
  double total = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double y = (q(i, j) - base) - carry;
      const double t = total + y;
      carry = (t - total) - y;
      total = t;
    }
  }
  return base + total / static_cast<double>(n * (n - 1));
}

double empirical_risk_u(const Params& p, const Dataset& S, const Objective& objective) {
  return u_statistic(S.size(), [&](std::size_t i, std::size_t j) { return objective.value(p, S[i], S[j]); });
}

double block_risk(std::size_t n, const PairKernel& q, std::span<const std::size_t> sigma) {
  require(n >= 2, ErrorCode::invalid_parameter, "block estimate needs n >= 2");
  require(sigma.size() == n, ErrorCode::invalid_parameter, "permutation length differs from n");
  std::vector<bool> seen(n, false);
  for (auto s : sigma) {
    require(s < n && !seen[s], ErrorCode::invalid_parameter, "sigma is not a permutation of [n]");
    seen[s] = true;
  }
  const std::size_t half = n / 2;
  double total = 0.0;
  for (std::size_t i = 0; i < half; ++i) total += q(sigma[i], sigma[half + i]);
  return total / static_cast<double>(half);
}

double block_risk(const Params& p, const Dataset& S, const Objective& objective, std::span<const std::size_t> sigma) {
  return block_risk(S.size(), [&](std::size_t i, std::size_t j) { return objective.value(p, S[i], S[j]); }, sigma);
}

double block_risk_identity_check(std::size_t n, const PairKernel& q) {
  require(n >= 2, ErrorCode::invalid_parameter, "identity check needs n >= 2");
  require(n <= 8, ErrorCode::invalid_parameter, "identity check enumerates n! permutations; n must be <= 8");
  // Tabulate once; the enumeration then touches only the table.
  std::vector<double> table(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) table[i * n + j] = q(i, j);
    }
  }
  const PairKernel lookup = [&](std::size_t i, std::size_t j) { return table[i * n + j]; };
  std::vector<std::size_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  double total = 0.0;
  double carry = 0.0;  // Kahan
  std::size_t count = 0;
  do {
    const double y = block_risk(n, lookup, sigma) - carry;
    const double t = total + y;
    carry = (t - total) - y;
    total = t;
    ++count;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return std::abs(total / static_cast<double>(count) - u_statistic(n, lookup));
}

double block_risk_identity_check(const Params& p, const Dataset& S, const Objective& objective) {
  return block_risk_identity_check(S.size(),
                                   [&](std::size_t i, std::size_t j) { return objective.value(p, S[i], S[j]); });
}

SampleSource SampleSource::generator(const GeneratorSpec& spec) {
  SampleSource s;
  s.spec_ = spec;
  return s;
}

SampleSource SampleSource::empirical(const Dataset& S) {
  SampleSource s;
  s.dataset_ = &S;
  return s;
}

Sample SampleSource::draw(Rng& rng) const {
  if (spec_) return spec_->draw(rng);
  return (*dataset_)[static_cast<std::size_t>(rng.below(dataset_->size()))];
}

McEstimate population_risk_mc(const Params& p, const SampleSource& source, const Objective& objective,
                              std::size_t m, std::uint64_t seed) {
  require(m >= 2, ErrorCode::invalid_parameter, "population estimate needs m >= 2");
  Rng rng(seed);
  // Welford; exact zero variance for constant losses.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Sample z = source.draw(rng);
    const Sample zt = source.draw(rng);
    const double x = objective.value(p, z, zt);
    const double delta = x - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (x - mean);
  }
  const double var = m2 / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m)), false};
}

GapEstimate generalization_gap(const Params& final_params, const Dataset& S, const Objective& objective,
                               const SampleSource& source, std::size_t m, std::uint64_t seed) {
  objective.check_domain(final_params);
  auto pop = population_risk_mc(final_params, source, objective, m, seed);
  if (source.is_generator()) {
    const auto& recorded = S.provenance().generator;
    pop.provenance_mismatch = recorded.has_value() && !(*recorded == *source.spec());
  }
  const double emp = empirical_risk_u(final_params, S, objective);
  return {pop.mean - emp, pop.mean, emp, pop.std_error, pop.provenance_mismatch};
}

GapEstimate generalization_gap(const RunRecord& run, const Dataset& S, const Objective& objective,
                               const SampleSource& source, std::size_t m, std::uint64_t seed) {
  return generalization_gap(run.final_params, S, objective, source, m, seed);
}

GapOverQ expected_gap_over_Q(const Dataset& S, const Objective& objective, const RunSpec& spec,
                             const SampleSource& source, std::size_t n_trajectories, std::size_t m,
                             std::uint64_t seed, unsigned jobs) {
  require(n_trajectories >= 2, ErrorCode::invalid_parameter, "expected gap needs n_trajectories >= 2");
  GapOverQ out;
  out.runs.resize(n_trajectories);
  out.run_kl.assign(n_trajectories, 0.0);
  out.run_log_renyi6.assign(n_trajectories, 0.0);
  parallel_for(n_trajectories, jobs, [&](std::size_t k) {
    const auto rec = run(S, objective, spec.eta, spec.T, spec.scheme, spec.init, derive_seed(seed, "run", k),
                         spec.options);
    out.runs[k] = generalization_gap(rec, S, objective, source, m, derive_seed(seed, "population", k));
    out.run_kl[k] = rec.kl();
    out.run_log_renyi6[k] = rec.renyi6().log_value;
  });
  double mean = 0.0;
  for (const auto& g : out.runs) mean += g.gap;
  mean /= static_cast<double>(n_trajectories);
  double ss = 0.0;
  for (const auto& g : out.runs) ss += (g.gap - mean) * (g.gap - mean);
  out.mean = mean;
  out.std_error = std::sqrt(ss / static_cast<double>(n_trajectories - 1) / static_cast<double>(n_trajectories));
  out.mean_kl = std::accumulate(out.run_kl.begin(), out.run_kl.end(), 0.0) / static_cast<double>(n_trajectories);
  const double top = *std::max_element(out.run_log_renyi6.begin(), out.run_log_renyi6.end());
  double scaled = 0.0;
  for (double l : out.run_log_renyi6) scaled += std::exp(l - top);
  out.log_mean_renyi6 = top + std::log(scaled / static_cast<double>(n_trajectories));
  return out;
}

}  // namespace pairstab
