#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pairstab/data.hpp"
#include "pairstab/losses.hpp"
#include "pairstab/sampling.hpp"

namespace pairstab {

enum class Algorithm { sgd, sgda };
enum class Regime { smooth, nonsmooth };

std::string_view to_string(Algorithm a);
std::string_view to_string(Regime r);
Algorithm parse_algorithm(std::string_view name);
Regime parse_regime(std::string_view name);

struct SgdState {
  Vec w;
  std::size_t t = 0;
  double eta = 0.0;
};

struct SgdaState {
  Vec w;
  Vec v;
  std::size_t t = 0;
  double eta = 0.0;
};

// w' = w - eta grad_w l(w; z_i, z_j). Throws domain-violation if w or w'
// leaves the loss domain.
SgdState sgd_step(const SgdState& state, PairIndex pair, const Dataset& S, const PairwiseLoss& loss);

// Simultaneous update, both gradients taken at (w_t, v_t).
SgdaState sgda_step(const SgdaState& state, PairIndex pair, const Dataset& S, const MinimaxLoss& loss);

struct RunOptions {
  // Require eta <= 2 / alpha (smooth-case analysis).
  bool smooth_analysis = false;
  // Keep every k-th iterate (0 = none). The initial point is snapshot 0.
  std::size_t snapshot_every = 0;
  std::uint64_t config_hash = 0;
};

/// Everything needed to audit and replay a run. Adaptive step distributions
/// are not stored; they are a deterministic function of (S, loss, scheme,
/// iterate) and are summarised by their per-step KL and log Renyi-6 factors
/// against the uniform prior.
struct RunRecord {
  Algorithm algorithm = Algorithm::sgd;
  std::string loss_name;
  double eta = 0.0;
  SchemeKind scheme = SchemeKind::uniform_prior;
  double eps = 0.0;
  std::size_t refresh_period = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  Params initial;
  Params final_params;
  Params averaged;  // mean of w_2 .. w_{T+1}
  Trajectory trajectory;
  std::vector<double> step_kl;
  std::vector<double> step_log_renyi;
  std::vector<Params> snapshots;

  std::size_t steps() const { return trajectory.length(); }
  double kl() const;
  RenyiMoment renyi6() const;
};

// The trajectory stream of a run with root seed `seed`; sample_trajectory on
// a fixed distribution with this seed draws the same pairs a run would.
std::uint64_t trajectory_seed(std::uint64_t seed);

// Throws config-error unless ||w1|| + T eta L_w <= R_w (and the v analogue),
// and, with smooth_analysis, eta <= 2 / alpha.
void check_step_budget(const Objective& objective, const Params& init, double eta, std::size_t T,
                       bool smooth_analysis);

RunRecord sgd_run(const Dataset& S, const Objective& objective, double eta, std::size_t T,
                  const SamplingScheme& scheme, const Vec& w1, std::uint64_t seed, const RunOptions& options = {});

RunRecord sgda_run(const Dataset& S, const Objective& objective, double eta, std::size_t T,
                   const SamplingScheme& scheme, const Vec& w1, const Vec& v1, std::uint64_t seed,
                   const RunOptions& options = {});

// Dispatches on objective.is_minimax(); `init.v` is used for SGDA.
RunRecord run(const Dataset& S, const Objective& objective, double eta, std::size_t T, const SamplingScheme& scheme,
              const Params& init, std::uint64_t seed, const RunOptions& options = {});

// Applies the recorded pairs from `init` without any sampling.
Params follow_trajectory(const Trajectory& traj, const Dataset& S, const Objective& objective, const Params& init,
                         double eta);
Params replay(const RunRecord& record, const Dataset& S, const Objective& objective);

struct Recipe {
  std::size_t T = 1;
  double eta = 0.0;
};

// smooth: T = ceil(c n), eta = c / sqrt(T); nonsmooth: T = ceil(c n^2),
// eta = c T^{-3/4}. Identical for both algorithms.
Recipe recipe(Algorithm algorithm, Regime regime, std::size_t n, double scale_c);

// Text form: `key = value` header, `---`, then `t i j` lines (1-based).
std::string format_run_record(const RunRecord& record);
RunRecord parse_run_record(std::string_view contents);
void save_run_record(const RunRecord& record, const std::string& path);
RunRecord load_run_record(const std::string& path);

}  // namespace pairstab
