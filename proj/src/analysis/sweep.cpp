#include "pairstab/analysis/sweep.hpp"

#include <cmath>

#include "pairstab/analysis/risk.hpp"
#include "pairstab/analysis/stability.hpp"
#include "pairstab/error.hpp"
#include "pairstab/parallel.hpp"

namespace pairstab {

SlopeFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& y_se) {
  require(x.size() == y.size() && y.size() == y_se.size(), ErrorCode::length_mismatch, "fit inputs differ in length");
  require(x.size() >= 2, ErrorCode::invalid_parameter, "fit needs >= 2 points");
  const std::size_t k = x.size();
  std::vector<double> lx(k);
  std::vector<double> ly(k);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::invalid_parameter, "log-log fit needs positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  require(sxx > 0.0, ErrorCode::invalid_parameter, "fit needs distinct x values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  // slope = sum c_i log y_i with c_i = (lx_i - mx) / sxx; var(log y_i) ~ (se_i / y_i)^2.
  double var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = (lx[i] - mx) / sxx;
    const double rel = y_se[i] / y[i];
    var += c * c * rel * rel;
  }
  fit.se = std::sqrt(var);
  return fit;
}

GapReport rate_sweep(const SweepConfig& config, std::uint64_t seed, unsigned jobs) {
  require(config.n_grid.size() >= 3, ErrorCode::invalid_parameter, "n_grid needs >= 3 points");
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    require(config.n_grid[k] >= 2, ErrorCode::invalid_parameter, "n_grid entries must be >= 2");
    require(k == 0 || config.n_grid[k] > config.n_grid[k - 1], ErrorCode::invalid_parameter,
            "n_grid must be strictly ascending");
  }
  require(config.replicates >= 2, ErrorCode::invalid_parameter, "replicates must be >= 2");
  require(config.m_population >= 2, ErrorCode::invalid_parameter, "m_population must be >= 2");

  const std::size_t d = config.generator.d;
  const double R_x = config.generator.feature_bound();
  const double R_y = config.generator.label_bound();
  const Vec init = config.init_scale * config.generator.hidden_direction();
  const bool minimax = config.algorithm == Algorithm::sgda;
  require(minimax == is_minimax_loss(config.loss.name), ErrorCode::config_error,
          "algorithm " + std::string(to_string(config.algorithm)) + " does not match loss '" + config.loss.name + "'");
  const SamplingScheme scheme;  // uniform prior
  const SampleSource source = SampleSource::generator(config.generator);

  GapReport rep;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const std::size_t n = config.n_grid[g];
    const Recipe rc = recipe(config.algorithm, config.regime, n, config.scale_c);
    const Params p0{init, minimax ? init : Vec()};
    const Objective objective =
        build_objective(config.loss, R_x, R_y, {rc.T, rc.eta, p0.w.norm(), p0.v.norm()});
    RunOptions options;
    options.smooth_analysis = config.regime == Regime::smooth;

    GapRow row;
    row.n = n;
    row.T = rc.T;
    row.eta = rc.eta;
    row.gaps.assign(config.replicates, 0.0);
    parallel_for(config.replicates, jobs, [&](std::size_t r) {
      // Common random numbers across the grid: replicate r draws its dataset
      // as a prefix of one stream (nested in n) and scores every n on the
      // same population pairs, so grid points share noise and the slope sees
      // less of it.
      const Dataset S = make_synthetic(config.generator.kind, n, d, config.generator.noise,
                                       config.common_random_numbers
                                           ? derive_seed(seed, "dataset", r)
                                           : derive_seed(seed, "dataset", static_cast<std::uint64_t>(n) * 1000003u + r));
      const auto rec = run(S, objective, rc.eta, rc.T, scheme, p0,
                           derive_seed(seed, "run", static_cast<std::uint64_t>(n) * 1000003u + r), options);
      row.gaps[r] = generalization_gap(rec, S, objective, source, config.m_population,
                                       config.common_random_numbers
                                           ? derive_seed(seed, "population", r)
                                           : derive_seed(seed, "population", static_cast<std::uint64_t>(n) * 1000003u + r))
                        .gap;
    });

    const double R = static_cast<double>(config.replicates);
    double sum_abs = 0.0;
    double sum = 0.0;
    for (double gap : row.gaps) {
      sum_abs += std::abs(gap);
      sum += gap;
    }
    row.mean_abs_gap = sum_abs / R;
    row.mean_gap = sum / R;
    double ss = 0.0;
    for (double gap : row.gaps) ss += (std::abs(gap) - row.mean_abs_gap) * (std::abs(gap) - row.mean_abs_gap);
    row.std_error = std::sqrt(ss / (R - 1.0) / R);

    const auto kind = stability_case(config.algorithm, config.regime);
    const auto& c = objective.constants();
    const auto coeffs = stability_coefficients(kind, c.L, c.alpha, rc.eta, rc.T, n);
    const auto bound = pacbayes_bound(0.0, RenyiMoment{}, 1.0 / static_cast<double>(n), config.delta_prime, coeffs, n,
                                      c.M, config.K1);
    row.bound_total = bound.total;
    for (double gap : row.gaps) row.dominated += gap <= bound.total ? 1 : 0;
    rep.rows.push_back(std::move(row));
  }

  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> ses;
  for (const auto& row : rep.rows) {
    if (row.mean_abs_gap == 0.0) rep.degenerate = true;
    xs.push_back(static_cast<double>(row.n));
    ys.push_back(row.mean_abs_gap);
    ses.push_back(row.std_error);
  }
  if (rep.degenerate) {
    rep.slope = rep.slope_se = std::nan("");
    rep.ci_low = rep.ci_high = std::nan("");
    return rep;
  }
  const auto fit = fit_log_log(xs, ys, ses);
  rep.slope = fit.slope;
  rep.slope_se = fit.se;
  rep.ci_low = fit.slope - 1.96 * fit.se;
  rep.ci_high = fit.slope + 1.96 * fit.se;
  return rep;
}

}  // namespace pairstab
