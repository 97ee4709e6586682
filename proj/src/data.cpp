#include "pairstab/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pairstab/error.hpp"
#include "pairstab/text.hpp"

namespace pairstab {
namespace {

// Relative slack when comparing a norm against a recorded bound; clipping
// rescales to exactly R_x and the norm recomputation can round up.
constexpr double kBoundSlack = 1e-12;

void clip_to_ball(Vec& x, double radius) {
  const double norm = x.norm();
  if (norm > radius) x *= radius / norm;
}

double clipped_normal(Rng& rng) { return std::clamp(rng.normal(), -3.0, 3.0); }

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::gauss_linear: return "gauss-linear";
    case GeneratorKind::gauss_bilinear_saddle: return "gauss-bilinear-saddle";
    case GeneratorKind::imbalanced_auc: return "imbalanced-auc";
  }
  return "?";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "gauss-linear") return GeneratorKind::gauss_linear;
  if (name == "gauss-bilinear-saddle") return GeneratorKind::gauss_bilinear_saddle;
  if (name == "imbalanced-auc") return GeneratorKind::imbalanced_auc;
  throw Error(ErrorCode::invalid_parameter, "unknown generator kind '" + std::string(name) + "'");
}

double GeneratorSpec::feature_bound() const { return 3.0 * std::sqrt(static_cast<double>(d)); }

double GeneratorSpec::label_bound() const {
  switch (kind) {
    case GeneratorKind::gauss_linear: return feature_bound() + 3.0 * noise;
    case GeneratorKind::gauss_bilinear_saddle: return 3.0 * noise;
    case GeneratorKind::imbalanced_auc: return 1.0;
  }
  return 0.0;
}

Vec GeneratorSpec::hidden_direction() const {
  return Vec::Constant(static_cast<Eigen::Index>(d), 1.0 / std::sqrt(static_cast<double>(d)));
}

Sample GeneratorSpec::draw(Rng& rng) const {
  Sample z;
  z.features.resize(static_cast<Eigen::Index>(d));
  switch (kind) {
    case GeneratorKind::gauss_linear: {
      for (Eigen::Index i = 0; i < z.features.size(); ++i) z.features[i] = rng.normal();
      clip_to_ball(z.features, feature_bound());
      z.label = z.features.dot(hidden_direction()) + noise * clipped_normal(rng);
      break;
    }
    case GeneratorKind::gauss_bilinear_saddle: {
      for (Eigen::Index i = 0; i < z.features.size(); ++i) z.features[i] = rng.normal();
      clip_to_ball(z.features, feature_bound());
      z.label = noise * clipped_normal(rng);
      break;
    }
    case GeneratorKind::imbalanced_auc: {
      z.label = rng.uniform() < 0.1 ? 1.0 : -1.0;
      for (Eigen::Index i = 0; i < z.features.size(); ++i) z.features[i] = rng.normal();
      z.features += 0.5 * z.label * hidden_direction();
      clip_to_ball(z.features, feature_bound());
      break;
    }
  }
  return z;
}

Dataset::Dataset(std::vector<Sample> samples, double feature_bound, Provenance provenance)
    : samples_(std::move(samples)), feature_bound_(feature_bound), provenance_(std::move(provenance)) {
  require(samples_.size() >= 2, ErrorCode::invalid_parameter, "a dataset needs n >= 2 samples");
  const auto d = samples_.front().features.size();
  require(d >= 1, ErrorCode::invalid_parameter, "samples need d >= 1 features");
  require(std::isfinite(feature_bound_) && feature_bound_ >= 0.0, ErrorCode::invalid_parameter,
          "feature bound must be finite and nonnegative");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& z = samples_[i];
    require(z.features.size() == d, ErrorCode::invalid_parameter,
            "sample " + std::to_string(i + 1) + " has a different dimension");
    require(z.features.allFinite() && std::isfinite(z.label), ErrorCode::invalid_parameter,
            "sample " + std::to_string(i + 1) + " is not finite");
    require(z.features.norm() <= feature_bound_ * (1.0 + kBoundSlack), ErrorCode::invalid_parameter,
            "sample " + std::to_string(i + 1) + " exceeds the feature bound R_x");
  }
}

Dataset make_synthetic(GeneratorKind kind, std::size_t n, std::size_t d, double noise,
                       std::uint64_t seed) {
  require(n >= 2, ErrorCode::invalid_parameter, "n must be >= 2");
  require(d >= 1, ErrorCode::invalid_parameter, "d must be >= 1");
  require(noise >= 0.0 && std::isfinite(noise), ErrorCode::invalid_parameter, "noise must be >= 0");
  const GeneratorSpec spec{kind, d, noise};
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) samples.push_back(spec.draw(rng));
  return Dataset(std::move(samples), spec.feature_bound(), Provenance{spec, seed});
}

Dataset neighbor(const Dataset& S, const NeighborSpec& spec) {
  require(spec.k >= 1 && spec.k <= S.size(), ErrorCode::index_out_of_range,
          "neighbor index " + std::to_string(spec.k) + " outside [1, " + std::to_string(S.size()) + "]");
  require(spec.replacement.features.size() == static_cast<Eigen::Index>(S.dim()),
          ErrorCode::invalid_parameter, "replacement has the wrong dimension");
  std::vector<Sample> samples = S.samples();
  samples[spec.k - 1] = spec.replacement;
  return Dataset(std::move(samples), S.feature_bound(), S.provenance());
}

std::string format_dataset(const Dataset& S) {
  std::ostringstream out;
  const auto& prov = S.provenance();
  if (prov.generator) {
    out << "# provenance kind=" << to_string(prov.generator->kind) << " d=" << prov.generator->d
        << " noise=" << text::format_double(prov.generator->noise);
    if (prov.seed) out << " seed=" << *prov.seed;
    out << '\n';
  }
  out << S.size() << ' ' << S.dim() << ' ' << text::format_double(S.feature_bound()) << '\n';
  for (const auto& z : S.samples()) {
    out << text::format_double(z.label);
    for (Eigen::Index j = 0; j < z.features.size(); ++j) out << ' ' << text::format_double(z.features[j]);
    out << '\n';
  }
  return out.str();
}

namespace {

Provenance parse_provenance(std::string_view line) {
  Provenance prov;
  GeneratorSpec spec;
  bool have_kind = false;
  for (auto token : text::split_ws(line)) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = token.substr(0, eq);
    const auto value = token.substr(eq + 1);
    if (key == "kind") {
      spec.kind = parse_generator_kind(value);
      have_kind = true;
    } else if (key == "d") {
      if (auto v = text::parse_int(value)) spec.d = static_cast<std::size_t>(*v);
    } else if (key == "noise") {
      if (auto v = text::parse_double(value)) spec.noise = *v;
    } else if (key == "seed") {
      std::uint64_t seed = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), seed);
      if (res.ec == std::errc() && res.ptr == value.data() + value.size()) prov.seed = seed;
    }
  }
  if (have_kind) prov.generator = spec;
  return prov;
}

}  // namespace

Dataset parse_dataset(std::string_view contents) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::malformed_file, what); };
  Provenance prov;
  std::vector<std::string_view> lines;
  for (auto line : text::split(contents, '\n')) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.substr(0, 12) == "# provenance") {
        try {
          prov = parse_provenance(line.substr(12));
        } catch (const Error&) {
          fail("bad provenance line");
        }
      }
      continue;
    }
    lines.push_back(line);
  }
  if (lines.empty()) fail("missing header line 'n d R_x'");
  const auto header = text::split_ws(lines.front());
  if (header.size() != 3) fail("header must be 'n d R_x'");
  const auto n = text::parse_int(header[0]);
  const auto d = text::parse_int(header[1]);
  const auto rx = text::parse_double(header[2]);
  if (!n || !d || !rx || *n < 2 || *d < 1) fail("invalid header values");
  if (lines.size() - 1 != static_cast<std::size_t>(*n)) {
    fail("expected " + std::to_string(*n) + " sample lines, found " + std::to_string(lines.size() - 1));
  }
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(*n));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto tokens = text::split_ws(lines[i]);
    if (tokens.size() != static_cast<std::size_t>(*d) + 1) {
      fail("sample line " + std::to_string(i) + " has " + std::to_string(tokens.size()) + " fields");
    }
    Sample z;
    z.features.resize(*d);
    const auto label = text::parse_double(tokens[0]);
    if (!label) fail("bad label on sample line " + std::to_string(i));
    z.label = *label;
    for (long long j = 0; j < *d; ++j) {
      const auto x = text::parse_double(tokens[static_cast<std::size_t>(j) + 1]);
      if (!x) fail("bad feature on sample line " + std::to_string(i));
      z.features[j] = *x;
    }
    samples.push_back(std::move(z));
  }
  try {
    return Dataset(std::move(samples), *rx, prov);
  } catch (const Error& e) {
    fail(e.what());
  }
  throw Error(ErrorCode::malformed_file, "unreachable");
}

void save_dataset(const Dataset& S, const std::string& path) {
  text::write_file_atomic(path, format_dataset(S));
}

Dataset load_dataset(const std::string& path) { return parse_dataset(text::read_file(path)); }

}  // namespace pairstab
