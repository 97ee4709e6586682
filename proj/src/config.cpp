#include "pairstab/config.hpp"

#include <algorithm>
#include <cmath>

#include "pairstab/error.hpp"
#include "pairstab/rng.hpp"
#include "pairstab/text.hpp"

namespace pairstab {

const std::vector<KeyInfo>& config_schema() {
  static const std::vector<KeyInfo> schema = {
      {"seed", ValueType::integer, "1", "root seed; every stream is derived from it"},
      {"out", ValueType::text, "out", "output directory"},
      {"jobs", ValueType::integer, "1", "worker threads for Monte Carlo fan-out"},
      {"run_record", ValueType::text, "", "run record consumed by `bound` (optional)"},

      {"data.kind", ValueType::text, "gauss-linear", "gauss-linear | gauss-bilinear-saddle | imbalanced-auc"},
      {"data.n", ValueType::integer, "50", "number of samples"},
      {"data.d", ValueType::integer, "2", "feature dimension"},
      {"data.noise", ValueType::real, "0.5", "label noise scale"},
      {"data.seed", ValueType::integer, "", "dataset seed (default: derived from seed)"},
      {"data.path", ValueType::text, "", "load the dataset from this file instead of generating it"},

      {"loss.name", ValueType::text, "logistic", "logistic | hinge | square | constant | bilinear"},
      {"loss.R_w", ValueType::real, "0", "radius of the w domain; 0 = smallest the step budget allows"},
      {"loss.R_v", ValueType::real, "0", "radius of the v domain (bilinear); 0 = automatic"},
      {"loss.lambda_w", ValueType::real, "0.1", "bilinear regulariser on w"},
      {"loss.lambda_v", ValueType::real, "0.1", "bilinear regulariser on v"},
      {"loss.constant", ValueType::real, "1", "value of the constant loss"},
      {"loss.certify_probes", ValueType::integer, "1000", "Monte Carlo probes for constant certification"},

      {"algo.name", ValueType::text, "sgd", "sgd | sgda"},
      {"algo.case", ValueType::text, "smooth", "smooth | nonsmooth"},
      {"algo.recipe", ValueType::boolean, "true", "derive (T, eta) from n and scale_c"},
      {"algo.scale_c", ValueType::real, "1", "recipe constant c"},
      {"algo.eta", ValueType::real, "", "fixed step size (algo.recipe = false)"},
      {"algo.T", ValueType::integer, "", "number of steps (algo.recipe = false)"},
      {"algo.init_scale", ValueType::real, "0", "w1 = v1 = init_scale * (1, ..., 1) / sqrt(d)"},

      {"sampling.scheme", ValueType::text, "uniform-prior",
       "uniform-prior | loss-proportional | gradnorm-proportional | custom-table"},
      {"sampling.eps", ValueType::real, "0.1", "fraction of the uniform prior mixed into Q"},
      {"sampling.refresh_period", ValueType::integer, "1", "steps between adaptive recomputations"},
      {"sampling.table", ValueType::text, "", "custom-table weights file"},

      {"analysis.delta", ValueType::real, "", "confidence level delta (default 1/n)"},
      {"analysis.delta_prime", ValueType::real, "0.05", "PAC-Bayes confidence delta'"},
      {"analysis.K1", ValueType::real, "1", "sub-Gaussian MGF constant"},
      {"analysis.n_trajectories", ValueType::integer, "1000", "trials for the tail check"},
      {"analysis.t", ValueType::integer, "", "tail-check horizon (default T)"},
      {"analysis.probe", ValueType::boolean, "true", "replay trials on neighbours and probe beta"},
      {"analysis.m_probe", ValueType::integer, "100", "probe pairs per trial"},
      {"analysis.c1_scale", ValueType::real, "1", "multiplier on c1 in the tail threshold"},
      {"analysis.c2_scale", ValueType::real, "1", "multiplier on c2 in the tail threshold"},
      {"analysis.gap_trajectories", ValueType::integer, "0", "`bound`: runs used to measure E_Q[G] (0 = skip)"},
      {"analysis.m_population", ValueType::integer, "100000", "fresh pairs per population-risk estimate"},
      {"analysis.n_grid", ValueType::int_list, "64,128,256,512", "sweep sample sizes"},
      {"analysis.replicates", ValueType::integer, "20", "sweep replicates per n"},
      {"analysis.common_random_numbers", ValueType::boolean, "false", "sweep: reuse datasets and population pairs across n"},

      {"chernoff.t", ValueType::integer, "100", "trajectory length"},
      {"chernoff.n", ValueType::integer, "10", "number of indices"},
      {"chernoff.delta", ValueType::real, "0.05", "confidence level"},
      {"chernoff.trials", ValueType::integer, "10000", "Monte Carlo trajectories"},
  };
  return schema;
}

namespace {

const KeyInfo* find_key(std::string_view key) {
  for (const auto& info : config_schema()) {
    if (info.key == key) return &info;
  }
  return nullptr;
}

// Empty optional on success, otherwise the complaint.
std::optional<std::string> type_error(const KeyInfo& info, std::string_view value) {
  switch (info.type) {
    case ValueType::integer:
      if (!text::parse_int(value)) return "expected an integer";
      break;
    case ValueType::real: {
      const auto v = text::parse_double(value);
      if (!v || !std::isfinite(*v)) return "expected a finite real number";
      break;
    }
    case ValueType::boolean:
      if (value != "true" && value != "false") return "expected true or false";
      break;
    case ValueType::int_list:
      for (auto piece : text::split(value, ',')) {
        const auto v = text::parse_int(piece);
        if (!v || *v < 0) return "expected a comma-separated list of nonnegative integers";
      }
      break;
    case ValueType::text:
      if (value.empty()) return "expected a value";
      break;
  }
  return std::nullopt;
}

}  // namespace

Config Config::parse(std::string_view contents, const std::string& origin) {
  Config cfg;
  std::size_t line_no = 0;
  for (auto raw : text::split(contents, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = text::trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::config_error, where + "expected key = value");
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string value(text::trim(line.substr(eq + 1)));
    const KeyInfo* info = find_key(key);
    if (info == nullptr) throw Error(ErrorCode::config_error, where + "unknown key '" + key + "'");
    if (cfg.values_.count(key) != 0) throw Error(ErrorCode::config_error, where + "duplicate key '" + key + "'");
    if (auto complaint = type_error(*info, value)) {
      throw Error(ErrorCode::config_error, where + key + ": " + *complaint + ", got '" + value + "'");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) { return parse(text::read_file(path), path); }

void Config::set(const std::string& key, const std::string& value) {
  const KeyInfo* info = find_key(key);
  require(info != nullptr, ErrorCode::config_error, "unknown key '" + key + "'");
  if (auto complaint = type_error(*info, value)) {
    throw Error(ErrorCode::config_error, key + ": " + *complaint + ", got '" + value + "'");
  }
  values_[key] = value;
}

bool Config::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::string Config::get_string(std::string_view key) const {
  const KeyInfo* info = find_key(key);
  require(info != nullptr, ErrorCode::config_error, "unknown key '" + std::string(key) + "'");
  auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  require(!info->fallback.empty(), ErrorCode::config_error, "missing required key '" + std::string(key) + "'");
  return std::string(info->fallback);
}

double Config::get_real(std::string_view key) const { return *text::parse_double(get_string(key)); }

std::int64_t Config::get_int(std::string_view key) const { return *text::parse_int(get_string(key)); }

std::uint64_t Config::get_uint(std::string_view key) const {
  const auto v = get_int(key);
  require(v >= 0, ErrorCode::config_error, std::string(key) + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(std::string_view key) const { return get_string(key) == "true"; }

std::vector<std::size_t> Config::get_list(std::string_view key) const {
  std::vector<std::size_t> out;
  for (auto piece : text::split(get_string(key), ',')) out.push_back(static_cast<std::size_t>(*text::parse_int(piece)));
  return out;
}

std::uint64_t Config::hash() const {
  std::string canonical;
  for (const auto& [k, v] : values_) {
    if (k == "out" || k == "jobs") continue;
    canonical += k + "=" + v + "\n";
  }
  return fnv1a64(canonical);
}

}  // namespace pairstab
