#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pairstab/analysis/bound.hpp"
#include "pairstab/data.hpp"
#include "pairstab/model.hpp"
#include "pairstab/optim.hpp"

namespace pairstab {

struct SweepConfig {
  Algorithm algorithm = Algorithm::sgd;
  Regime regime = Regime::smooth;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 20;
  double scale_c = 1.0;
  GeneratorSpec generator{GeneratorKind::gauss_linear, 5, 1.0};
  LossSpec loss;
  double init_scale = 0.0;  // w1 = v1 = init_scale * (1, ..., 1) / sqrt(d)
  std::size_t m_population = 100000;
  // Nest datasets across n and share population pairs within a replicate.
  bool common_random_numbers = false;
  // Inputs for the per-n bound column (uniform Q, so KL = 0).
  double delta_prime = 0.05;
  double K1 = 1.0;
};

struct GapRow {
  std::size_t n = 0;
  std::size_t T = 0;
  double eta = 0.0;
  double mean_abs_gap = 0.0;
  double std_error = 0.0;  // of mean_abs_gap over replicates
  double mean_gap = 0.0;
  double bound_total = 0.0;
  std::size_t dominated = 0;  // replicates with gap <= bound_total
  std::vector<double> gaps;
};

struct GapReport {
  std::vector<GapRow> rows;
  bool degenerate = false;  // some mean |gap| is 0; slope undefined
  double slope = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Least-squares slope of log y on log x with a delta-method standard error
// from the per-point standard errors of y.
struct SlopeFit {
  double slope = 0.0;
  double se = 0.0;
};
SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& y_se);

// For each n: recipe (T, eta), `replicates` fresh datasets, one uniform run
// each, gap against the generator.
GapReport rate_sweep(const SweepConfig& config, std::uint64_t seed, unsigned jobs = 1);

}  // namespace pairstab
