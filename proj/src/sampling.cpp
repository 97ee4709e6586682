#include "pairstab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pairstab/error.hpp"
#include "pairstab/text.hpp"

namespace pairstab {

StepDistribution StepDistribution::uniform(std::size_t n) {
  require(n >= 2, ErrorCode::invalid_parameter, "uniform prior needs n >= 2");
  return StepDistribution(n, true);
}

StepDistribution StepDistribution::from_weights(std::size_t n, std::vector<double> weights) {
  require(n >= 2, ErrorCode::invalid_parameter, "step distribution needs n >= 2");
  require(weights.size() == n * n, ErrorCode::invalid_parameter, "weight table must have n*n entries");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights[i * n + j];
      require(std::isfinite(w) && w >= 0.0, ErrorCode::invalid_parameter, "weights must be finite and >= 0");
      require(i != j || w == 0.0, ErrorCode::invalid_parameter, "diagonal pairs (i, i) must have weight 0");
      total += w;
    }
  }
  require(total > 0.0, ErrorCode::invalid_parameter, "weights sum to zero");
  StepDistribution dist(n, false);
  dist.prob_ = std::move(weights);
  dist.cdf_.resize(n * n);
  double running = 0.0;
  for (std::size_t idx = 0; idx < n * n; ++idx) {
    dist.prob_[idx] /= total;
    running += dist.prob_[idx];
    dist.cdf_[idx] = running;
  }
  return dist;
}

double StepDistribution::prob(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  if (uniform_) return 1.0 / static_cast<double>(support_size());
  return prob_[i * n_ + j];
}

std::vector<double> StepDistribution::table() const {
  if (!uniform_) return prob_;
  std::vector<double> out(n_ * n_, 1.0 / static_cast<double>(support_size()));
  for (std::size_t i = 0; i < n_; ++i) out[i * n_ + i] = 0.0;
  return out;
}

PairIndex StepDistribution::sample(Rng& rng) const {
  if (uniform_) {
    const auto i = static_cast<std::size_t>(rng.below(n_));
    auto j = static_cast<std::size_t>(rng.below(n_ - 1));
    if (j >= i) ++j;
    return {i, j};
  }
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  auto idx = static_cast<std::size_t>(it - cdf_.begin());
  if (idx >= cdf_.size()) idx = cdf_.size() - 1;
  while (prob_[idx] == 0.0) --idx;  // upper_bound lands past zero-mass runs only at the end
  return {idx / n_, idx % n_};
}

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::uniform_prior: return "uniform-prior";
    case SchemeKind::loss_proportional: return "loss-proportional";
    case SchemeKind::gradnorm_proportional: return "gradnorm-proportional";
    case SchemeKind::custom_table: return "custom-table";
  }
  return "?";
}

SchemeKind parse_scheme_kind(std::string_view name) {
  if (name == "uniform-prior" || name == "uniform") return SchemeKind::uniform_prior;
  if (name == "loss-proportional") return SchemeKind::loss_proportional;
  if (name == "gradnorm-proportional") return SchemeKind::gradnorm_proportional;
  if (name == "custom-table") return SchemeKind::custom_table;
  throw Error(ErrorCode::invalid_parameter, "unknown sampling scheme '" + std::string(name) + "'");
}

void SamplingScheme::validate(std::size_t n) const {
  require(refresh_period >= 1, ErrorCode::invalid_parameter, "refresh_period must be >= 1");
  if (adaptive()) {
    require(eps > 0.0 && eps <= 1.0, ErrorCode::invalid_parameter, "adaptive schemes need eps in (0, 1]");
  }
  if (kind == SchemeKind::custom_table) {
    require(eps >= 0.0 && eps <= 1.0, ErrorCode::invalid_parameter, "custom-table needs eps in [0, 1]");
    require(table != nullptr, ErrorCode::invalid_parameter, "custom-table scheme without a table");
    require(table->n() == n, ErrorCode::invalid_parameter, "custom table size does not match n");
  }
}

StepDistribution uniform_prior(std::size_t n) { return StepDistribution::uniform(n); }

StepDistribution mix_with_uniform(std::size_t n, std::span<const double> scores, double eps) {
  require(eps >= 0.0 && eps <= 1.0, ErrorCode::invalid_parameter, "eps must lie in [0, 1]");
  require(scores.size() == n * n, ErrorCode::invalid_parameter, "score table must have n*n entries");
  if (eps == 1.0) return StepDistribution::uniform(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double s = scores[i * n + j];
      require(std::isfinite(s) && s >= 0.0, ErrorCode::invalid_parameter, "scores must be finite and >= 0");
      total += s;
    }
  }
  if (total == 0.0) return StepDistribution::uniform(n);
  const double floor = eps / static_cast<double>(n * (n - 1));
  std::vector<double> weights(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) weights[i * n + j] = (1.0 - eps) * scores[i * n + j] / total + floor;
    }
  }
  return StepDistribution::from_weights(n, std::move(weights));
}

StepDistribution adaptive_step(const SamplingScheme& scheme, const Params& state, const Dataset& S,
                               const Objective& objective) {
  const std::size_t n = S.size();
  scheme.validate(n);
  switch (scheme.kind) {
    case SchemeKind::uniform_prior:
      return StepDistribution::uniform(n);
    case SchemeKind::custom_table:
      return mix_with_uniform(n, scheme.table->table(), scheme.eps);
    case SchemeKind::loss_proportional:
    case SchemeKind::gradnorm_proportional: {
      objective.check_domain(state);
      std::vector<double> scores(n * n, 0.0);
      const bool by_loss = scheme.kind == SchemeKind::loss_proportional;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j) continue;
          scores[i * n + j] = by_loss ? objective.shifted_value(state, S[i], S[j])
                                      : objective.gradient_norm(state, S[i], S[j]);
        }
      }
      return mix_with_uniform(n, scores, scheme.eps);
    }
  }
  throw Error(ErrorCode::invalid_parameter, "unknown scheme");
}

Trajectory sample_trajectory(std::span<const StepDistribution> per_step, std::uint64_t seed) {
  require(!per_step.empty(), ErrorCode::invalid_parameter, "T must be >= 1");
  Rng rng(seed);
  Trajectory traj{per_step.front().n(), {}};
  traj.steps.reserve(per_step.size());
  for (const auto& dist : per_step) {
    require(dist.n() == traj.n, ErrorCode::invalid_parameter, "step distributions disagree on n");
    traj.steps.push_back(dist.sample(rng));
  }
  return traj;
}

Trajectory sample_trajectory(const StepDistribution& every_step, std::size_t T, std::uint64_t seed) {
  require(T >= 1, ErrorCode::invalid_parameter, "T must be >= 1");
  Rng rng(seed);
  Trajectory traj{every_step.n(), {}};
  traj.steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) traj.steps.push_back(every_step.sample(rng));
  return traj;
}

// Both information quantities below are written as sums over the support of
// P of nonnegative terms, using sum Q = sum P = 1:
//   KL   = sum P (r log r - r + 1)
//   m6-1 = sum P (r^6 - 6r + 5) = sum P (r-1)^2 (r^4 + 2r^3 + 3r^2 + 4r + 5)
// with r = Q/P. Every term is >= 0 and vanishes only at r = 1, so the results
// are exactly 0 (resp. 1) iff Q = P and never dip below through rounding.
namespace {

template <typename Term>
double sum_over_ratio(const StepDistribution& Q, const StepDistribution& P, Term term) {
  require(Q.n() == P.n(), ErrorCode::invalid_parameter, "distributions over different n");
  const std::size_t n = Q.n();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = Q.prob(i, j);
      const double p = P.prob(i, j);
      if (p == 0.0) {
        require(q == 0.0, ErrorCode::absolute_continuity_violation,
                "Q puts mass on pair (" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                    ") where P has none");
        continue;
      }
      total += p * term(q / p);
    }
  }
  return total;
}

}  // namespace

double kl_step(const StepDistribution& Q, const StepDistribution& P) {
  if (Q.is_uniform() && P.is_uniform() && Q.n() == P.n()) return 0.0;
  return sum_over_ratio(Q, P, [](double r) { return r > 0.0 ? r * std::log(r) - r + 1.0 : 1.0; });
}

double kl_trajectory(std::span<const StepDistribution> Q_steps, std::span<const StepDistribution> P_steps) {
  require(Q_steps.size() == P_steps.size(), ErrorCode::length_mismatch,
          "Q has " + std::to_string(Q_steps.size()) + " steps, P has " + std::to_string(P_steps.size()));
  double total = 0.0;
  for (std::size_t t = 0; t < Q_steps.size(); ++t) total += kl_step(Q_steps[t], P_steps[t]);
  return total;
}

double RenyiMoment::value() const { return std::exp(log_value); }
bool RenyiMoment::overflow() const { return !std::isfinite(value()); }
RenyiMoment RenyiMoment::from_value(double value) {
  require(value >= 1.0, ErrorCode::invalid_parameter, "a Renyi-6 moment is >= 1");
  return RenyiMoment{std::log(value)};
}

double log_renyi6_step(const StepDistribution& Q, const StepDistribution& P) {
  if (Q.is_uniform() && P.is_uniform() && Q.n() == P.n()) return 0.0;
  const double excess = sum_over_ratio(Q, P, [](double r) {
    const double d = r - 1.0;
    return d * d * ((((r + 2.0) * r + 3.0) * r + 4.0) * r + 5.0);
  });
  return std::log1p(excess);
}

RenyiMoment renyi_moment6(std::span<const StepDistribution> Q_steps, std::span<const StepDistribution> P_steps) {
  require(Q_steps.size() == P_steps.size(), ErrorCode::length_mismatch, "Q and P differ in length");
  RenyiMoment m;
  for (std::size_t t = 0; t < Q_steps.size(); ++t) m.log_value += log_renyi6_step(Q_steps[t], P_steps[t]);
  return m;
}

std::size_t occupancy(const Trajectory& traj, std::size_t k) {
  require(k >= 1 && k <= traj.n, ErrorCode::index_out_of_range,
          "index " + std::to_string(k) + " outside [1, " + std::to_string(traj.n) + "]");
  std::size_t count = 0;
  for (const auto& step : traj.steps) {
    if (step.i == k - 1 || step.j == k - 1) ++count;
  }
  return count;
}

std::vector<std::size_t> occupancy_counts(const Trajectory& traj, std::size_t t) {
  require(t <= traj.length(), ErrorCode::invalid_parameter, "t exceeds trajectory length");
  std::vector<std::size_t> counts(traj.n, 0);
  for (std::size_t s = 0; s < t; ++s) {
    const auto& step = traj.steps[s];
    ++counts[step.i];
    if (step.j != step.i) ++counts[step.j];
  }
  return counts;
}

std::size_t max_occupancy(const Trajectory& traj, std::size_t t) {
  const auto counts = occupancy_counts(traj, t);
  return *std::max_element(counts.begin(), counts.end());
}

std::size_t max_occupancy(const Trajectory& traj) { return max_occupancy(traj, traj.length()); }

double chernoff_occupancy_bound(std::size_t t, std::size_t n, double delta) {
  require(t >= 1, ErrorCode::invalid_parameter, "t must be >= 1");
  require(n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  require(delta > 0.0 && delta < 1.0, ErrorCode::invalid_parameter, "delta must lie in (0, 1)");
  const double ratio = static_cast<double>(t) / static_cast<double>(n);
  const double log_term = std::log(static_cast<double>(n) / delta);
  return 2.0 * ratio + log_term + 2.0 * std::sqrt(ratio * log_term);
}

StepDistribution parse_custom_table(std::string_view contents, std::size_t n) {
  require(n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  std::vector<double> weights(n * n, 0.0);
  std::vector<bool> seen(n * n, false);
  std::size_t line_no = 0;
  for (auto line : text::split(contents, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto tokens = text::split_ws(line);
    const auto where = " on table line " + std::to_string(line_no);
    if (tokens.size() != 3) throw Error(ErrorCode::malformed_file, "expected 'i j weight'" + where);
    const auto i = text::parse_int(tokens[0]);
    const auto j = text::parse_int(tokens[1]);
    const auto w = text::parse_double(tokens[2]);
    if (!i || !j || !w) throw Error(ErrorCode::malformed_file, "unparsable entry" + where);
    if (*i < 1 || *j < 1 || *i > static_cast<long long>(n) || *j > static_cast<long long>(n)) {
      throw Error(ErrorCode::malformed_file, "index outside [1, n]" + where);
    }
    if (*i == *j) throw Error(ErrorCode::malformed_file, "diagonal pair" + where);
    if (!std::isfinite(*w) || *w < 0.0) throw Error(ErrorCode::malformed_file, "negative weight" + where);
    const auto idx = static_cast<std::size_t>(*i - 1) * n + static_cast<std::size_t>(*j - 1);
    if (seen[idx]) throw Error(ErrorCode::malformed_file, "duplicate pair" + where);
    seen[idx] = true;
    weights[idx] = *w;
  }
  try {
    return StepDistribution::from_weights(n, std::move(weights));
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_file, e.what());
  }
}

StepDistribution load_custom_table(const std::string& path, std::size_t n) {
  return parse_custom_table(text::read_file(path), n);
}

}  // namespace pairstab
