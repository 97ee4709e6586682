#include "pairstab/optim.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "pairstab/error.hpp"
#include "pairstab/rng.hpp"
#include "pairstab/text.hpp"

namespace pairstab {

std::string_view to_string(Algorithm a) { return a == Algorithm::sgd ? "sgd" : "sgda"; }
std::string_view to_string(Regime r) { return r == Regime::smooth ? "smooth" : "nonsmooth"; }

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sgd") return Algorithm::sgd;
  if (name == "sgda") return Algorithm::sgda;
  throw Error(ErrorCode::invalid_parameter, "unknown algorithm '" + std::string(name) + "'");
}

Regime parse_regime(std::string_view name) {
  if (name == "smooth") return Regime::smooth;
  if (name == "nonsmooth") return Regime::nonsmooth;
  throw Error(ErrorCode::invalid_parameter, "unknown case '" + std::string(name) + "'");
}

namespace {

void check_pair(PairIndex pair, const Dataset& S) {
  require(pair.i < S.size() && pair.j < S.size() && pair.i != pair.j, ErrorCode::index_out_of_range,
          "pair (" + std::to_string(pair.i + 1) + ", " + std::to_string(pair.j + 1) + ") invalid for n = " +
              std::to_string(S.size()));
}

}  // namespace

SgdState sgd_step(const SgdState& state, PairIndex pair, const Dataset& S, const PairwiseLoss& loss) {
  check_pair(pair, S);
  SgdState next{state.w - state.eta * loss.gradient(state.w, S[pair.i], S[pair.j]), state.t + 1, state.eta};
  loss.check_domain(next.w);
  return next;
}

SgdaState sgda_step(const SgdaState& state, PairIndex pair, const Dataset& S, const MinimaxLoss& loss) {
  check_pair(pair, S);
  const Sample& z = S[pair.i];
  const Sample& zt = S[pair.j];
  const Vec gw = loss.gradient_w(state.w, state.v, z, zt);
  const Vec gv = loss.gradient_v(state.w, state.v, z, zt);
  SgdaState next{state.w - state.eta * gw, state.v + state.eta * gv, state.t + 1, state.eta};
  loss.check_domain(next.w, next.v);
  return next;
}

double RunRecord::kl() const {
  double total = 0.0;
  for (double k : step_kl) total += k;
  return total;
}

RenyiMoment RunRecord::renyi6() const {
  RenyiMoment m;
  for (double l : step_log_renyi) m.log_value += l;
  return m;
}

std::uint64_t trajectory_seed(std::uint64_t seed) { return derive_seed(seed, "trajectory"); }

void check_step_budget(const Objective& objective, const Params& init, double eta, std::size_t T,
                       bool smooth_analysis) {
  require(eta > 0.0 && std::isfinite(eta), ErrorCode::config_error, "eta must be positive");
  require(T >= 1, ErrorCode::config_error, "T must be >= 1");
  const LossConstants& c = objective.constants();
  const double reach = static_cast<double>(T) * eta;
  const double need_w = init.w.norm() + reach * c.L_w;
  require(need_w <= c.R_w * (1.0 + 1e-12), ErrorCode::config_error,
          "step budget violated: ||w1|| + T eta L = " + text::format_double(need_w) + " > R_w = " +
              text::format_double(c.R_w));
  if (objective.is_minimax()) {
    const double need_v = init.v.norm() + reach * c.L_v;
    require(need_v <= c.R_v * (1.0 + 1e-12), ErrorCode::config_error,
            "step budget violated: ||v1|| + T eta L = " + text::format_double(need_v) + " > R_v = " +
                text::format_double(c.R_v));
  }
  if (smooth_analysis) {
    require(c.smooth && c.alpha.has_value(), ErrorCode::config_error,
            "smooth-case analysis requested for non-smooth loss '" + objective.name() + "'");
    require(*c.alpha == 0.0 || eta <= 2.0 / *c.alpha, ErrorCode::config_error,
            "smooth case needs eta <= 2 / alpha = " + text::format_double(2.0 / *c.alpha));
  }
}

namespace {

Params apply_step(const Params& p, PairIndex pair, const Dataset& S, const Objective& objective, double eta) {
  if (objective.is_minimax()) {
    const auto next = sgda_step({p.w, p.v, 0, eta}, pair, S, objective.minimax());
    return {next.w, next.v};
  }
  return {sgd_step({p.w, 0, eta}, pair, S, objective.pairwise()).w, Vec()};
}

RunRecord run_impl(Algorithm algorithm, const Dataset& S, const Objective& objective, double eta, std::size_t T,
                   const SamplingScheme& scheme, const Params& init, std::uint64_t seed,
                   const RunOptions& options) {
  check_step_budget(objective, init, eta, T, options.smooth_analysis);
  scheme.validate(S.size());
  objective.check_domain(init);

  RunRecord rec;
  rec.algorithm = algorithm;
  rec.loss_name = objective.name();
  rec.eta = eta;
  rec.scheme = scheme.kind;
  rec.eps = scheme.eps;
  rec.refresh_period = scheme.refresh_period;
  rec.seed = seed;
  rec.config_hash = options.config_hash;
  rec.initial = init;
  rec.trajectory.n = S.size();
  rec.trajectory.steps.reserve(T);
  rec.step_kl.reserve(T);
  rec.step_log_renyi.reserve(T);

  const StepDistribution prior = uniform_prior(S.size());
  StepDistribution dist = prior;
  double kl = 0.0;
  double log_renyi = 0.0;
  Rng rng(trajectory_seed(seed));

  Params p = init;
  Params sum{Vec::Zero(init.w.size()), Vec::Zero(init.v.size())};
  if (options.snapshot_every > 0) rec.snapshots.push_back(p);
  for (std::size_t t = 0; t < T; ++t) {
    const bool refresh = scheme.kind == SchemeKind::custom_table ? t == 0 : t % scheme.refresh_period == 0;
    if (scheme.kind != SchemeKind::uniform_prior && refresh) {
      dist = adaptive_step(scheme, p, S, objective);
      kl = kl_step(dist, prior);
      log_renyi = log_renyi6_step(dist, prior);
    }
    const PairIndex pair = dist.sample(rng);
    p = apply_step(p, pair, S, objective, eta);
    rec.trajectory.steps.push_back(pair);
    rec.step_kl.push_back(kl);
    rec.step_log_renyi.push_back(log_renyi);
    sum.w += p.w;
    if (p.has_v()) sum.v += p.v;
    if (options.snapshot_every > 0 && (t + 1) % options.snapshot_every == 0) rec.snapshots.push_back(p);
  }
  rec.final_params = p;
  rec.averaged = {sum.w / static_cast<double>(T), p.has_v() ? Vec(sum.v / static_cast<double>(T)) : Vec()};

  // Triangle inequality over the steps; fails only if a declared L is wrong.
  const LossConstants& c = objective.constants();
  const double reach = static_cast<double>(T) * eta;
  require((p.w - init.w).norm() <= reach * c.L_w * (1.0 + 1e-9) + 1e-12, ErrorCode::domain_violation,
          "||w_T - w_1|| exceeds T eta L");
  if (p.has_v()) {
    require((p.v - init.v).norm() <= reach * c.L_v * (1.0 + 1e-9) + 1e-12, ErrorCode::domain_violation,
            "||v_T - v_1|| exceeds T eta L");
  }
  return rec;
}

}  // namespace

RunRecord sgd_run(const Dataset& S, const Objective& objective, double eta, std::size_t T,
                  const SamplingScheme& scheme, const Vec& w1, std::uint64_t seed, const RunOptions& options) {
  require(!objective.is_minimax(), ErrorCode::config_error, "sgd needs a pairwise loss");
  return run_impl(Algorithm::sgd, S, objective, eta, T, scheme, {w1, Vec()}, seed, options);
}

RunRecord sgda_run(const Dataset& S, const Objective& objective, double eta, std::size_t T,
                   const SamplingScheme& scheme, const Vec& w1, const Vec& v1, std::uint64_t seed,
                   const RunOptions& options) {
  require(objective.is_minimax(), ErrorCode::config_error, "sgda needs a minimax loss");
  require(v1.size() > 0, ErrorCode::config_error, "sgda needs an initial v");
  return run_impl(Algorithm::sgda, S, objective, eta, T, scheme, {w1, v1}, seed, options);
}

RunRecord run(const Dataset& S, const Objective& objective, double eta, std::size_t T, const SamplingScheme& scheme,
              const Params& init, std::uint64_t seed, const RunOptions& options) {
  if (objective.is_minimax()) return sgda_run(S, objective, eta, T, scheme, init.w, init.v, seed, options);
  return sgd_run(S, objective, eta, T, scheme, init.w, seed, options);
}

Params follow_trajectory(const Trajectory& traj, const Dataset& S, const Objective& objective, const Params& init,
                         double eta) {
  require(traj.n == S.size(), ErrorCode::invalid_parameter, "trajectory was drawn for a different n");
  Params p = init;
  for (const auto& pair : traj.steps) p = apply_step(p, pair, S, objective, eta);
  return p;
}

Params replay(const RunRecord& record, const Dataset& S, const Objective& objective) {
  return follow_trajectory(record.trajectory, S, objective, record.initial, record.eta);
}

Recipe recipe(Algorithm /*algorithm*/, Regime regime, std::size_t n, double scale_c) {
  require(n >= 2, ErrorCode::invalid_parameter, "recipe needs n >= 2");
  require(scale_c > 0.0 && std::isfinite(scale_c), ErrorCode::invalid_parameter, "scale_c must be > 0");
  const double nn = static_cast<double>(n);
  const double raw = regime == Regime::smooth ? scale_c * nn : scale_c * nn * nn;
  // c n is often a float a few ulps above an integer; do not let that add a step.
  double T = std::ceil(raw);
  if (T - raw > 1.0 - 1e-9 * raw) T -= 1.0;
  T = std::max(T, 1.0);
  const double eta = regime == Regime::smooth ? scale_c / std::sqrt(T) : scale_c * std::pow(T, -0.75);
  return {static_cast<std::size_t>(T), eta};
}

// ---------------------------------------------------------------- run record files

namespace {

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string format_vec(const Vec& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += text::format_double(v[k]);
  }
  return out;
}

Vec parse_vec(std::string_view s) {
  const auto tokens = text::split_ws(s);
  Vec v(static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto x = text::parse_double(tokens[k]);
    require(x.has_value(), ErrorCode::malformed_file, "bad number '" + std::string(tokens[k]) + "'");
    v[static_cast<Eigen::Index>(k)] = *x;
  }
  return v;
}

}  // namespace

std::string format_run_record(const RunRecord& r) {
  std::ostringstream out;
  out << "format = pairstab-run-1\n";
  out << "algorithm = " << to_string(r.algorithm) << '\n';
  out << "loss = " << r.loss_name << '\n';
  out << "n = " << r.trajectory.n << '\n';
  out << "T = " << r.steps() << '\n';
  out << "eta = " << text::format_double(r.eta) << '\n';
  out << "scheme = " << to_string(r.scheme) << '\n';
  out << "eps = " << text::format_double(r.eps) << '\n';
  out << "refresh_period = " << r.refresh_period << '\n';
  out << "seed = " << r.seed << '\n';
  out << "config_hash = " << hex64(r.config_hash) << '\n';
  out << "w1 = " << format_vec(r.initial.w) << '\n';
  out << "v1 = " << format_vec(r.initial.v) << '\n';
  out << "w_final = " << format_vec(r.final_params.w) << '\n';
  out << "v_final = " << format_vec(r.final_params.v) << '\n';
  out << "w_avg = " << format_vec(r.averaged.w) << '\n';
  out << "v_avg = " << format_vec(r.averaged.v) << '\n';
  out << "kl = " << text::format_double(r.kl()) << '\n';
  out << "log_renyi6 = " << text::format_double(r.renyi6().log_value) << '\n';
  out << "---\n";
  out << "t i j kl_step log_renyi6_step\n";
  for (std::size_t t = 0; t < r.steps(); ++t) {
    const auto& s = r.trajectory.steps[t];
    out << t + 1 << ' ' << s.i + 1 << ' ' << s.j + 1 << ' ' << text::format_double(r.step_kl[t]) << ' '
        << text::format_double(r.step_log_renyi[t]) << '\n';
  }
  return out.str();
}

RunRecord parse_run_record(std::string_view contents) {
  const auto lines = text::split(contents, '\n');
  std::map<std::string, std::string, std::less<>> header;
  std::size_t k = 0;
  for (; k < lines.size() && lines[k] != "---"; ++k) {
    if (lines[k].empty() || lines[k].front() == '#') continue;
    const auto eq = lines[k].find('=');
    require(eq != std::string_view::npos, ErrorCode::malformed_file,
            "run record line " + std::to_string(k + 1) + ": expected key = value");
    header[std::string(text::trim(lines[k].substr(0, eq)))] = std::string(text::trim(lines[k].substr(eq + 1)));
  }
  require(k < lines.size(), ErrorCode::malformed_file, "run record has no '---' separator");
  auto get = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    require(it != header.end(), ErrorCode::malformed_file, std::string("run record lacks '") + key + "'");
    return it->second;
  };
  auto get_uint = [&](const char* key) {
    const auto v = text::parse_int(get(key));
    require(v.has_value() && *v >= 0, ErrorCode::malformed_file, std::string("bad integer for '") + key + "'");
    return static_cast<std::uint64_t>(*v);
  };
  auto get_double = [&](const char* key) {
    const auto v = text::parse_double(get(key));
    require(v.has_value(), ErrorCode::malformed_file, std::string("bad number for '") + key + "'");
    return *v;
  };

  RunRecord r;
  require(get("format") == "pairstab-run-1", ErrorCode::malformed_file, "unknown run record format");
  try {
    r.algorithm = parse_algorithm(get("algorithm"));
    r.scheme = parse_scheme_kind(get("scheme"));
  } catch (const Error& e) {
    throw Error(ErrorCode::malformed_file, e.what());
  }
  r.loss_name = get("loss");
  r.trajectory.n = get_uint("n");
  const auto T = get_uint("T");
  r.eta = get_double("eta");
  r.eps = get_double("eps");
  r.refresh_period = get_uint("refresh_period");
  {
    const auto& s = get("seed");
    std::uint64_t seed = 0;
    std::istringstream in(s);
    require(static_cast<bool>(in >> seed), ErrorCode::malformed_file, "bad seed");
    r.seed = seed;
    const auto& h = get("config_hash");
    const auto res = std::from_chars(h.data(), h.data() + h.size(), r.config_hash, 16);
    require(res.ec == std::errc() && res.ptr == h.data() + h.size(), ErrorCode::malformed_file, "bad config_hash");
  }
  r.initial = {parse_vec(get("w1")), parse_vec(get("v1"))};
  r.final_params = {parse_vec(get("w_final")), parse_vec(get("v_final"))};
  r.averaged = {parse_vec(get("w_avg")), parse_vec(get("v_avg"))};

  ++k;  // column header
  require(k < lines.size() && lines[k].rfind("t i j", 0) == 0, ErrorCode::malformed_file,
          "run record body lacks its column header");
  for (++k; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto tokens = text::split_ws(lines[k]);
    const auto where = " at run record line " + std::to_string(k + 1);
    require(tokens.size() == 5, ErrorCode::malformed_file, "expected 't i j kl log_renyi6'" + where);
    const auto t = text::parse_int(tokens[0]);
    const auto i = text::parse_int(tokens[1]);
    const auto j = text::parse_int(tokens[2]);
    const auto kl = text::parse_double(tokens[3]);
    const auto lr = text::parse_double(tokens[4]);
    require(t && i && j && kl && lr, ErrorCode::malformed_file, "unparsable step" + where);
    require(*t == static_cast<long long>(r.steps() + 1), ErrorCode::malformed_file, "steps out of order" + where);
    const auto n = static_cast<long long>(r.trajectory.n);
    require(*i >= 1 && *j >= 1 && *i <= n && *j <= n && *i != *j, ErrorCode::malformed_file,
            "invalid pair" + where);
    r.trajectory.steps.push_back({static_cast<std::size_t>(*i - 1), static_cast<std::size_t>(*j - 1)});
    r.step_kl.push_back(*kl);
    r.step_log_renyi.push_back(*lr);
  }
  require(r.steps() == T, ErrorCode::malformed_file,
          "run record declares T = " + std::to_string(T) + " but lists " + std::to_string(r.steps()) + " steps");
  return r;
}

void save_run_record(const RunRecord& record, const std::string& path) {
  text::write_file_atomic(path, format_run_record(record));
}

RunRecord load_run_record(const std::string& path) { return parse_run_record(text::read_file(path)); }

}  // namespace pairstab
