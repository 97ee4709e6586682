#include "pairstab/commands.hpp"

#include <cmath>
#include <limits>
#include <filesystem>
#include <memory>

#include "pairstab/analysis/bound.hpp"
#include "pairstab/analysis/risk.hpp"
#include "pairstab/analysis/stability.hpp"
#include "pairstab/analysis/sweep.hpp"
#include "pairstab/data.hpp"
#include "pairstab/model.hpp"
#include "pairstab/optim.hpp"
#include "pairstab/parallel.hpp"
#include "pairstab/report.hpp"
#include "pairstab/rng.hpp"
#include "pairstab/sampling.hpp"
#include "pairstab/text.hpp"

namespace pairstab {

int exit_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::certification_failure: return exit_certification;
    case ErrorCode::io_error:
    case ErrorCode::malformed_file: return exit_io;
    default: return exit_config;
  }
}

namespace {

std::string out_path(const CommandOptions& opts, const std::string& name) {
  return (std::filesystem::path(opts.out_dir) / name).string();
}

// Wraps errors from the library layer so that parameter problems found while
// assembling an experiment surface as config-errors.
template <typename F>
auto as_config(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_parameter) throw Error(ErrorCode::config_error, e.what());
    throw;
  }
}

/// Everything a subcommand derives from the config: data, loss, algorithm.
struct Experiment {
  const Config& cfg;
  std::uint64_t seed = 0;
  std::unique_ptr<Dataset> S;
  std::optional<GeneratorSpec> generator;
  Algorithm algorithm = Algorithm::sgd;
  Regime regime = Regime::smooth;
  std::size_t T = 1;
  double eta = 0.0;
  Params init;
  LossSpec loss;
  std::optional<Objective> objective;
  SamplingScheme scheme;
  RunOptions options;

  explicit Experiment(const Config& c) : cfg(c) {}

  SampleSource source() const {
    return generator ? SampleSource::generator(*generator) : SampleSource::empirical(*S);
  }
  StabilityCase kind() const { return stability_case(algorithm, regime); }
  double delta() const {
    return cfg.has("analysis.delta") ? cfg.get_real("analysis.delta") : 1.0 / static_cast<double>(S->size());
  }
};

GeneratorSpec generator_from(const Config& cfg) {
  return as_config([&] {
    GeneratorSpec g;
    g.kind = parse_generator_kind(cfg.get_string("data.kind"));
    g.d = static_cast<std::size_t>(cfg.get_uint("data.d"));
    g.noise = cfg.get_real("data.noise");
    require(g.d >= 1, ErrorCode::invalid_parameter, "data.d must be >= 1");
    require(g.noise >= 0.0, ErrorCode::invalid_parameter, "data.noise must be >= 0");
    return g;
  });
}

std::unique_ptr<Dataset> dataset_from(const Config& cfg, std::uint64_t seed) {
  if (cfg.has("data.path")) return std::make_unique<Dataset>(load_dataset(cfg.get_string("data.path")));
  const auto g = generator_from(cfg);
  const auto n = static_cast<std::size_t>(cfg.get_uint("data.n"));
  const auto data_seed = cfg.has("data.seed") ? cfg.get_uint("data.seed") : derive_seed(seed, "dataset");
  return as_config([&] { return std::make_unique<Dataset>(make_synthetic(g.kind, n, g.d, g.noise, data_seed)); });
}

LossSpec loss_from(const Config& cfg) {
  LossSpec l;
  l.name = cfg.get_string("loss.name");
  l.R_w = cfg.get_real("loss.R_w");
  l.R_v = cfg.get_real("loss.R_v");
  l.lambda_w = cfg.get_real("loss.lambda_w");
  l.lambda_v = cfg.get_real("loss.lambda_v");
  l.constant = cfg.get_real("loss.constant");
  return l;
}

std::unique_ptr<Experiment> setup(const Config& cfg) {
  auto ex = std::make_unique<Experiment>(cfg);
  ex->seed = cfg.get_uint("seed");
  ex->S = dataset_from(cfg, ex->seed);
  ex->generator = ex->S->provenance().generator;
  const Dataset& S = *ex->S;
  const std::size_t d = S.dim();

  as_config([&] {
    ex->algorithm = parse_algorithm(cfg.get_string("algo.name"));
    ex->regime = parse_regime(cfg.get_string("algo.case"));
    return 0;
  });
  if (cfg.get_bool("algo.recipe")) {
    require(!cfg.has("algo.T") && !cfg.has("algo.eta"), ErrorCode::config_error,
            "algo.T / algo.eta conflict with algo.recipe = true");
    const auto rc = as_config([&] { return recipe(ex->algorithm, ex->regime, S.size(), cfg.get_real("algo.scale_c")); });
    ex->T = rc.T;
    ex->eta = rc.eta;
  } else {
    ex->T = static_cast<std::size_t>(cfg.get_uint("algo.T"));
    ex->eta = cfg.get_real("algo.eta");
  }

  ex->loss = loss_from(cfg);
  const bool minimax = ex->algorithm == Algorithm::sgda;
  require(minimax == is_minimax_loss(ex->loss.name), ErrorCode::config_error,
          "algo.name = " + std::string(to_string(ex->algorithm)) + " cannot train loss '" + ex->loss.name + "'");
  const Vec w1 = cfg.get_real("algo.init_scale") * Vec::Ones(static_cast<Eigen::Index>(d)) /
                 std::sqrt(static_cast<double>(d));
  ex->init = {w1, minimax ? w1 : Vec()};

  double R_y = ex->generator ? ex->generator->label_bound() : 0.0;
  if (!ex->generator) {
    for (const auto& s : S.samples()) R_y = std::max(R_y, std::abs(s.label));
  }
  ex->objective =
      build_objective(ex->loss, S.feature_bound(), R_y, {ex->T, ex->eta, ex->init.w.norm(), ex->init.v.norm()});

  as_config([&] {
    ex->scheme.kind = parse_scheme_kind(cfg.get_string("sampling.scheme"));
    ex->scheme.eps = cfg.get_real("sampling.eps");
    ex->scheme.refresh_period = static_cast<std::size_t>(cfg.get_uint("sampling.refresh_period"));
    if (ex->scheme.kind == SchemeKind::custom_table) {
      ex->scheme.table =
          std::make_shared<const StepDistribution>(load_custom_table(cfg.get_string("sampling.table"), S.size()));
    }
    ex->scheme.validate(S.size());
    return 0;
  });

  ex->options.smooth_analysis = ex->regime == Regime::smooth;
  ex->options.config_hash = cfg.hash();
  check_step_budget(*ex->objective, ex->init, ex->eta, ex->T, ex->options.smooth_analysis);
  return ex;
}

void certify(const Experiment& ex) {
  certify_constants(*ex.objective, ex.S->dim(), static_cast<std::size_t>(ex.cfg.get_uint("loss.certify_probes")),
                    derive_seed(ex.seed, "certify"));
}

Report base_report(const std::string& kind, const Config& cfg) {
  Report r;
  r.set("report", kind);
  r.set("config_hash", hex_hash(cfg.hash()));
  r.set("seed", cfg.get_uint("seed"));
  return r;
}

void describe(Report& r, const Experiment& ex) {
  const auto& c = ex.objective->constants();
  r.set("algorithm", std::string(to_string(ex.algorithm)));
  r.set("case", std::string(to_string(ex.regime)));
  r.set("loss", ex.objective->name());
  r.set("n", static_cast<std::uint64_t>(ex.S->size()));
  r.set("d", static_cast<std::uint64_t>(ex.S->dim()));
  r.set("T", static_cast<std::uint64_t>(ex.T));
  r.set("eta", ex.eta);
  r.set("L", c.L);
  r.set("alpha", c.alpha ? text::format_double(*c.alpha) : std::string("none"));
  r.set("M", c.M);
  r.set("R_x", c.R_x);
  r.set("R_w", c.R_w);
  if (ex.objective->is_minimax()) r.set("R_v", c.R_v);
  r.set("scheme", std::string(to_string(ex.scheme.kind)));
  r.set("eps", ex.scheme.eps);
}

void write_coefficients(Report& r, const StabilityCoefficients& c) {
  r.set("stability_case", std::string(to_string(c.kind)));
  r.set("c1", c.c1);
  r.set("c2", c.c2);
  r.set("alt_c1", c.alt_c1);
  r.set("alt_c2", c.alt_c2);
  r.set("exp_factor", c.exp_factor);
  if (!c.variant_note.empty()) r.set("variant_note", c.variant_note);
}

}  // namespace

CommandResult cmd_gen_data(const CommandOptions& opts) {
  const Config& cfg = opts.config;
  const auto S = dataset_from(cfg, cfg.get_uint("seed"));
  const std::string contents = format_dataset(*S);
  const auto path = out_path(opts, "dataset.txt");
  text::write_file_atomic(path, contents);
  CommandResult res;
  res.files.push_back(path);
  res.lines.push_back("dataset " + path + " n=" + std::to_string(S->size()) + " d=" + std::to_string(S->dim()) +
                      " hash=" + hex_hash(fnv1a64(contents)));
  return res;
}

CommandResult cmd_train(const CommandOptions& opts) {
  const auto ex = setup(opts.config);
  certify(*ex);
  const auto rec = run(*ex->S, *ex->objective, ex->eta, ex->T, ex->scheme, ex->init, derive_seed(ex->seed, "train"),
                       ex->options);
  const double risk0 = empirical_risk_u(rec.initial, *ex->S, *ex->objective);
  const double risk = empirical_risk_u(rec.final_params, *ex->S, *ex->objective);

  const auto run_file = out_path(opts, "run.txt");
  save_run_record(rec, run_file);

  Report r = base_report("train", opts.config);
  describe(r, *ex);
  r.set("initial_empirical_risk", risk0);
  r.set("final_empirical_risk", risk);
  r.set("kl", rec.kl());
  r.set("log_renyi6", rec.renyi6().log_value);
  r.set("steps", static_cast<std::uint64_t>(rec.steps()));
  r.columns = {"t", "empirical_risk"};
  const std::size_t every = std::max<std::size_t>(1, ex->T / 20);
  Params p = rec.initial;
  for (std::size_t t = 0; t < rec.steps(); ++t) {
    Trajectory one{rec.trajectory.n, {rec.trajectory.steps[t]}};
    p = follow_trajectory(one, *ex->S, *ex->objective, p, rec.eta);
    if ((t + 1) % every == 0 || t + 1 == rec.steps()) {
      r.rows.push_back({std::to_string(t + 1), text::format_double(empirical_risk_u(p, *ex->S, *ex->objective))});
    }
  }
  const auto report_file = out_path(opts, "train.txt");
  r.save(report_file);

  CommandResult res;
  res.files = {run_file, report_file};
  res.lines.push_back("final_empirical_risk=" + text::format_double(risk) + " kl=" + text::format_double(rec.kl()) +
                      " steps=" + std::to_string(rec.steps()));
  return res;
}

CommandResult cmd_stability(const CommandOptions& opts) {
  const Config& cfg = opts.config;
  const auto ex = setup(cfg);
  certify(*ex);
  const auto& c = ex->objective->constants();

  TailCheckSpec spec;
  spec.kind = ex->kind();
  spec.n = ex->S->size();
  spec.t = cfg.has("analysis.t") ? static_cast<std::size_t>(cfg.get_uint("analysis.t")) : ex->T;
  spec.eta = ex->eta;
  spec.L = c.L;
  spec.alpha = c.alpha;
  spec.delta = ex->delta();
  spec.n_trajectories = static_cast<std::size_t>(cfg.get_uint("analysis.n_trajectories"));
  spec.c1_scale = cfg.get_real("analysis.c1_scale");
  spec.c2_scale = cfg.get_real("analysis.c2_scale");
  if (is_smooth(spec.kind) && !c.alpha) {
    throw Error(ErrorCode::config_error, "smooth case needs a smooth loss");
  }

  std::optional<ProbeSetup> probe;
  if (cfg.get_bool("analysis.probe")) {
    require(spec.t <= ex->T, ErrorCode::config_error, "probing needs analysis.t <= T (the step budget covers T)");
    probe = ProbeSetup{ex->S.get(), &*ex->objective, ex->init, ex->source(),
                       static_cast<std::size_t>(cfg.get_uint("analysis.m_probe"))};
  }
  const auto rep = as_config([&] {
    return tail_check(spec, derive_seed(ex->seed, "stability"), probe ? &*probe : nullptr, opts.jobs);
  });

  Report r = base_report("stability", cfg);
  describe(r, *ex);
  write_coefficients(r, rep.coeffs);
  r.set("t", static_cast<std::uint64_t>(spec.t));
  r.set("delta", spec.delta);
  r.set("c1_scale", spec.c1_scale);
  r.set("c2_scale", spec.c2_scale);
  r.set("threshold", rep.threshold);
  r.set("n_trajectories", static_cast<std::uint64_t>(spec.n_trajectories));
  r.set("probed", rep.probed);
  r.set("bound_exceedances", static_cast<std::uint64_t>(rep.bound_exceedances));
  r.set("probe_exceedances", static_cast<std::uint64_t>(rep.probe_exceedances));
  r.set("domination_failures", static_cast<std::uint64_t>(rep.domination_failures));
  r.set("bound_frequency", rep.bound_frequency);
  r.set("probe_frequency", rep.probe_frequency);
  r.set("tolerance", rep.tolerance);
  r.set("verdict", rep.pass ? "PASS" : "FAIL");
  r.columns = {"trial",     "max_occupancy",  "trajectory_bound", "threshold",
               "neighbor_k", "beta_hat", "param_distance", "lipschitz_certificate"};
  for (std::size_t k = 0; k < rep.trials.size(); ++k) {
    const auto& row = rep.trials[k];
    r.rows.push_back({std::to_string(k + 1), std::to_string(row.max_occupancy),
                      text::format_double(row.trajectory_bound), text::format_double(rep.threshold),
                      std::to_string(row.neighbor_k), text::format_double(row.beta_hat),
                      text::format_double(row.param_distance), text::format_double(row.lipschitz_certificate)});
  }
  const auto file = out_path(opts, "stability.txt");
  r.save(file);

  CommandResult res;
  res.files.push_back(file);
  res.lines.push_back(std::string(rep.pass ? "PASS" : "FAIL") + " " + std::string(to_string(spec.kind)) +
                      " exceedance=" + text::format_double(rep.bound_frequency) +
                      " tolerance=" + text::format_double(rep.tolerance));
  res.status = rep.pass ? exit_ok : exit_acceptance_fail;
  return res;
}

namespace {

// Re-derives lambda and the terms of a saved bound report from its inputs.
CommandResult verify_bound_report(const std::string& path) {
  const Report saved = Report::load(path);
  const auto again = pacbayes_bound(read_bound_inputs(saved));
  CommandResult res;
  bool ok = true;
  for (const auto& [key, value] : {std::pair<const char*, double>{"lambda", again.lambda},
                                   {"main_term", again.main_term},
                                   {"residual_term", again.residual_term},
                                   {"total", again.total}}) {
    const bool same = saved.get(key) == text::format_double(value);
    ok = ok && same;
    res.lines.push_back(std::string(same ? "match " : "MISMATCH ") + key + " stored=" + saved.get(key) +
                        " recomputed=" + text::format_double(value));
  }
  res.status = ok ? exit_ok : exit_acceptance_fail;
  return res;
}

}  // namespace

CommandResult cmd_bound(const CommandOptions& opts) {
  if (opts.report_path) return verify_bound_report(*opts.report_path);

  const Config& cfg = opts.config;
  const auto ex = setup(cfg);
  certify(*ex);

  std::optional<std::string> run_file = opts.run_path;
  if (!run_file && cfg.has("run_record")) run_file = cfg.get_string("run_record");
  RunRecord rec;
  if (run_file) {
    rec = load_run_record(*run_file);
    require(rec.trajectory.n == ex->S->size(), ErrorCode::config_error, "run record n differs from the dataset");
  } else {
    rec = run(*ex->S, *ex->objective, ex->eta, ex->T, ex->scheme, ex->init, derive_seed(ex->seed, "train"),
              ex->options);
  }

  const auto& c = ex->objective->constants();
  const auto coeffs =
      as_config([&] { return stability_coefficients(ex->kind(), c.L, c.alpha, rec.eta, rec.steps(), ex->S->size()); });
  double kl = rec.kl();
  RenyiMoment renyi = rec.renyi6();

  const auto n_gap = static_cast<std::size_t>(cfg.get_uint("analysis.gap_trajectories"));
  std::optional<GapOverQ> measured;
  if (n_gap > 0) {
    RunSpec spec{ex->eta, ex->T, ex->scheme, ex->init, ex->options};
    measured = as_config([&] {
      return expected_gap_over_Q(*ex->S, *ex->objective, spec, ex->source(), n_gap,
                                 static_cast<std::size_t>(cfg.get_uint("analysis.m_population")),
                                 derive_seed(ex->seed, "gap"), opts.jobs);
    });
    // KL(Q||P) and the moment of the induced path distribution, estimated
    // over the same trajectories.
    kl = measured->mean_kl;
    renyi.log_value = measured->log_mean_renyi6;
  }

  const auto bound = as_config([&] {
    return pacbayes_bound(kl, renyi, ex->delta(), cfg.get_real("analysis.delta_prime"), coeffs, ex->S->size(), c.M,
                          cfg.get_real("analysis.K1"));
  });

  Report r = base_report("bound", cfg);
  describe(r, *ex);
  write_coefficients(r, coeffs);
  write_bound(r, bound);
  r.set("kl_source", measured ? "mean-over-gap-trajectories" : "run-record");
  r.columns = {"run", "gap", "population_risk", "empirical_risk", "population_stderr", "dominated"};
  if (measured) {
    r.set("measured_gap_mean", measured->mean);
    r.set("measured_gap_stderr", measured->std_error);
    std::size_t dominated = 0;
    for (std::size_t k = 0; k < measured->runs.size(); ++k) {
      const auto& g = measured->runs[k];
      const bool dom = g.gap <= bound.total;
      dominated += dom ? 1 : 0;
      r.rows.push_back({std::to_string(k + 1), text::format_double(g.gap), text::format_double(g.population),
                        text::format_double(g.empirical), text::format_double(g.std_error), dom ? "1" : "0"});
    }
    r.set("dominated_runs", static_cast<std::uint64_t>(dominated));
    r.set("dominates_mean", measured->mean <= bound.total);
  }
  const auto file = out_path(opts, "bound.txt");
  r.save(file);

  CommandResult res;
  res.files.push_back(file);
  std::string line = "lambda=" + text::format_double(bound.lambda) + " main=" + text::format_double(bound.main_term) +
                     " residual=" + text::format_double(bound.residual_term) +
                     " total=" + text::format_double(bound.total) + " kl=" + text::format_double(kl);
  if (measured) line += " measured_gap=" + text::format_double(measured->mean);
  res.lines.push_back(line);
  return res;
}

CommandResult cmd_sweep(const CommandOptions& opts) {
  const Config& cfg = opts.config;
  SweepConfig sc;
  as_config([&] {
    sc.algorithm = parse_algorithm(cfg.get_string("algo.name"));
    sc.regime = parse_regime(cfg.get_string("algo.case"));
    return 0;
  });
  require(cfg.get_bool("algo.recipe"), ErrorCode::config_error, "sweep always uses the recipe (algo.recipe = true)");
  require(cfg.get_string("sampling.scheme") == "uniform-prior", ErrorCode::config_error,
          "sweep runs under the uniform prior only");
  require(!cfg.has("data.path"), ErrorCode::config_error, "sweep draws fresh datasets; data.path is not allowed");
  sc.n_grid = cfg.get_list("analysis.n_grid");
  sc.replicates = static_cast<std::size_t>(cfg.get_uint("analysis.replicates"));
  sc.scale_c = cfg.get_real("algo.scale_c");
  sc.generator = generator_from(cfg);
  sc.loss = loss_from(cfg);
  sc.init_scale = cfg.get_real("algo.init_scale");
  sc.m_population = static_cast<std::size_t>(cfg.get_uint("analysis.m_population"));
  sc.delta_prime = cfg.get_real("analysis.delta_prime");
  sc.K1 = cfg.get_real("analysis.K1");
  sc.common_random_numbers = cfg.get_bool("analysis.common_random_numbers");
  const auto seed = cfg.get_uint("seed");
  const auto rep = as_config([&] { return rate_sweep(sc, derive_seed(seed, "sweep"), opts.jobs); });

  Report r = base_report("sweep", cfg);
  r.set("algorithm", std::string(to_string(sc.algorithm)));
  r.set("case", std::string(to_string(sc.regime)));
  r.set("loss", sc.loss.name);
  r.set("generator", std::string(to_string(sc.generator.kind)));
  r.set("d", static_cast<std::uint64_t>(sc.generator.d));
  r.set("noise", sc.generator.noise);
  r.set("scale_c", sc.scale_c);
  r.set("replicates", static_cast<std::uint64_t>(sc.replicates));
  r.set("m_population", static_cast<std::uint64_t>(sc.m_population));
  r.set("common_random_numbers", sc.common_random_numbers);
  r.set("degenerate", rep.degenerate);
  r.set("slope", rep.slope);
  r.set("slope_se", rep.slope_se);
  r.set("slope_ci_low", rep.ci_low);
  r.set("slope_ci_high", rep.ci_high);
  r.columns = {"n", "T", "eta", "mean_abs_gap", "std_error", "mean_gap", "bound_total", "dominated"};
  for (const auto& row : rep.rows) {
    r.rows.push_back({std::to_string(row.n), std::to_string(row.T), text::format_double(row.eta),
                      text::format_double(row.mean_abs_gap), text::format_double(row.std_error),
                      text::format_double(row.mean_gap), text::format_double(row.bound_total),
                      std::to_string(row.dominated)});
  }
  const auto file = out_path(opts, "sweep.txt");
  r.save(file);

  CommandResult res;
  res.files.push_back(file);
  if (rep.degenerate) {
    res.lines.push_back("slope=degenerate (some mean |gap| is 0)");
  } else {
    res.lines.push_back("slope=" + text::format_double(rep.slope) + " ci=[" + text::format_double(rep.ci_low) + ", " +
                        text::format_double(rep.ci_high) + "]");
  }
  return res;
}

CommandResult cmd_chernoff(const CommandOptions& opts) {
  const Config& cfg = opts.config;
  const auto t = static_cast<std::size_t>(cfg.get_uint("chernoff.t"));
  const auto n = static_cast<std::size_t>(cfg.get_uint("chernoff.n"));
  const double delta = cfg.get_real("chernoff.delta");
  const auto trials = static_cast<std::size_t>(cfg.get_uint("chernoff.trials"));
  require(trials >= 1, ErrorCode::config_error, "chernoff.trials must be >= 1");
  const double bound = as_config([&] { return chernoff_occupancy_bound(t, n, delta); });
  const auto seed = derive_seed(cfg.get_uint("seed"), "chernoff");

  const StepDistribution prior = uniform_prior(n);
  std::vector<std::size_t> occ(trials, 0);
  parallel_for(trials, opts.jobs, [&](std::size_t k) {
    occ[k] = max_occupancy(sample_trajectory(prior, t, derive_seed(seed, "trajectory", k)));
  });
  std::size_t exceed = 0;
  for (auto o : occ) exceed += static_cast<double>(o) > bound ? 1 : 0;
  const double freq = static_cast<double>(exceed) / static_cast<double>(trials);
  const bool pass = freq <= delta;

  Report r = base_report("chernoff", cfg);
  r.set("t", static_cast<std::uint64_t>(t));
  r.set("n", static_cast<std::uint64_t>(n));
  r.set("delta", delta);
  r.set("trials", static_cast<std::uint64_t>(trials));
  r.set("bound", bound);
  r.set("exceedances", static_cast<std::uint64_t>(exceed));
  r.set("frequency", freq);
  r.set("verdict", pass ? "PASS" : "FAIL");
  r.columns = {"trial", "max_occupancy", "bound", "exceeds"};
  const std::string bound_text = text::format_double(bound);
  for (std::size_t k = 0; k < trials; ++k) {
    r.rows.push_back({std::to_string(k + 1), std::to_string(occ[k]), bound_text,
                      static_cast<double>(occ[k]) > bound ? "1" : "0"});
  }
  const auto file = out_path(opts, "chernoff.txt");
  r.save(file);

  CommandResult res;
  res.files.push_back(file);
  res.lines.push_back(std::string(pass ? "PASS" : "FAIL") + " coverage exceedance=" + text::format_double(freq) +
                      " delta=" + text::format_double(delta) + " bound=" + bound_text);
  res.status = pass ? exit_ok : exit_acceptance_fail;
  return res;
}

}  // namespace pairstab
