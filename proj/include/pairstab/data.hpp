#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pairstab/rng.hpp"

namespace pairstab {

using Vec = Eigen::VectorXd;

struct Sample {
  Vec features;
  double label = 0.0;

  bool operator==(const Sample& other) const {
    return label == other.label && features.size() == other.features.size() &&
           features == other.features;
  }
};

enum class GeneratorKind { gauss_linear, gauss_bilinear_saddle, imbalanced_auc };

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view name);

/// Distribution D over samples for the synthetic generators.
///
/// All kinds draw standard-normal features clipped radially to
/// R_x = 3 sqrt(d). Gaussian label noise is clipped at 3 sigma so that
/// label_bound() is a certified bound on |y|.
///   gauss-linear          y = <x, w*> + noise * eps, w* = (1, ..., 1) / sqrt(d)
///   gauss-bilinear-saddle y = noise * eps (labels unused by the saddle loss)
///   imbalanced-auc        y = +1 with probability 0.1, else -1;
///                         x is shifted by 0.5 * y * w* before clipping
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::gauss_linear;
  std::size_t d = 1;
  double noise = 0.0;

  double feature_bound() const;
  double label_bound() const;
  Vec hidden_direction() const;
  Sample draw(Rng& rng) const;

  bool operator==(const GeneratorSpec&) const = default;
};

struct Provenance {
  std::optional<GeneratorSpec> generator;
  std::optional<std::uint64_t> seed;

  bool operator==(const Provenance&) const = default;
};

/// Immutable ordered training set S = (z_1, ..., z_n). Indices are 0-based in
/// code and 1-based in every file and report.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, double feature_bound, Provenance provenance = {});

  std::size_t size() const { return samples_.size(); }
  std::size_t dim() const { return samples_.front().features.size(); }
  double feature_bound() const { return feature_bound_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }
  const Provenance& provenance() const { return provenance_; }

  bool operator==(const Dataset& other) const {
    return feature_bound_ == other.feature_bound_ && samples_ == other.samples_;
  }

 private:
  std::vector<Sample> samples_;
  double feature_bound_;
  Provenance provenance_;
};

struct NeighborSpec {
  std::size_t k = 1;  // 1-based position to replace
  Sample replacement;
};

Dataset make_synthetic(GeneratorKind kind, std::size_t n, std::size_t d, double noise,
                       std::uint64_t seed);

// S with position spec.k replaced; S itself is untouched.
Dataset neighbor(const Dataset& S, const NeighborSpec& spec);

// Plain-text format, see docs/formats.md.
std::string format_dataset(const Dataset& S);
Dataset parse_dataset(std::string_view contents);
void save_dataset(const Dataset& S, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace pairstab
