#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "pairstab/data.hpp"
#include "pairstab/error.hpp"
#include "pairstab/text.hpp"

namespace pairstab {
namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pairstab_test_" + name)).string();
}

TEST(MakeSynthetic, DeterministicForFixedArguments) {
  const auto a = make_synthetic(GeneratorKind::gauss_linear, 2, 1, 0.0, 7);
  const auto b = make_synthetic(GeneratorKind::gauss_linear, 2, 1, 0.0, 7);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(a.dim(), 1u);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(format_dataset(a), format_dataset(b));
}

TEST(MakeSynthetic, FeaturesRespectTheRecordedBound) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 100, 5, 0.1, 1);
  EXPECT_DOUBLE_EQ(S.feature_bound(), 3.0 * std::sqrt(5.0));
  for (const auto& z : S.samples()) EXPECT_LE(z.features.norm(), S.feature_bound() * (1 + 1e-12));
}

TEST(MakeSynthetic, ClippingActuallyBindsInOneDimension) {
  // In d = 1 the radius is 3, so about 0.27% of draws are clipped.
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 5000, 1, 0.0, 11);
  std::size_t at_bound = 0;
  for (const auto& z : S.samples()) {
    EXPECT_LE(std::abs(z.features[0]), 3.0);
    at_bound += std::abs(z.features[0]) == 3.0 ? 1 : 0;
  }
  EXPECT_GT(at_bound, 0u);
}

TEST(MakeSynthetic, NoiselessLinearLabelsFollowTheHiddenDirection) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 20, 4, 0.0, 2);
  for (const auto& z : S.samples()) EXPECT_NEAR(z.label, z.features.sum() / 2.0, 1e-12);
}

TEST(MakeSynthetic, ImbalancedPositiveFraction) {
  const auto S = make_synthetic(GeneratorKind::imbalanced_auc, 1000, 2, 0.0, 3);
  std::size_t positives = 0;
  for (const auto& z : S.samples()) {
    ASSERT_TRUE(z.label == 1.0 || z.label == -1.0);
    positives += z.label > 0 ? 1 : 0;
  }
  const double frac = static_cast<double>(positives) / 1000.0;
  EXPECT_GE(frac, 0.07);
  EXPECT_LE(frac, 0.13);
}

TEST(MakeSynthetic, RejectsBadSizes) {
  try {
    make_synthetic(GeneratorKind::gauss_linear, 1, 2, 0.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
  }
  EXPECT_THROW(make_synthetic(GeneratorKind::gauss_linear, 5, 0, 0.0, 1), Error);
  EXPECT_THROW(make_synthetic(GeneratorKind::gauss_linear, 5, 2, -1.0, 1), Error);
}

TEST(Neighbor, IdentityReplacementGivesEqualDataset) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 6, 3, 0.5, 4);
  EXPECT_TRUE(neighbor(S, {1, S[0]}) == S);
}

TEST(Neighbor, DiffersOnlyAtPositionK) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 3, 2, 0.5, 5);
  const auto T = make_synthetic(GeneratorKind::gauss_linear, 3, 2, 0.5, 6);
  const auto S2 = neighbor(S, {2, T[0]});
  EXPECT_TRUE(S2[0] == S[0]);
  EXPECT_TRUE(S2[1] == T[0]);
  EXPECT_FALSE(S2[1] == S[1]);
  EXPECT_TRUE(S2[2] == S[2]);
  // Restoring the original sample gives S back.
  EXPECT_TRUE(neighbor(S2, {2, S[1]}) == S);
}

TEST(Neighbor, RejectsOutOfRangeIndex) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 3, 2, 0.5, 5);
  for (std::size_t k : {std::size_t{0}, std::size_t{4}}) {
    try {
      neighbor(S, {k, S[0]});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::index_out_of_range);
    }
  }
}

TEST(DatasetFile, RoundTripIsBitExact) {
  const auto S = make_synthetic(GeneratorKind::imbalanced_auc, 40, 3, 0.0, 9);
  const auto path = temp_path("roundtrip.txt");
  save_dataset(S, path);
  const auto back = load_dataset(path);
  EXPECT_TRUE(back == S);
  EXPECT_EQ(back.feature_bound(), S.feature_bound());
  ASSERT_TRUE(back.provenance().generator.has_value());
  EXPECT_TRUE(*back.provenance().generator == *S.provenance().generator);
  EXPECT_EQ(back.provenance().seed, S.provenance().seed);
  std::filesystem::remove(path);
}

TEST(DatasetFile, FullSixtyFourBitSeedSurvives) {
  const std::uint64_t seed = 0xF1E2D3C4B5A69788ull;
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 4, 1, 0.1, seed);
  EXPECT_EQ(parse_dataset(format_dataset(S)).provenance().seed, seed);
}

TEST(DatasetFile, TruncatedFileIsMalformed) {
  const auto S = make_synthetic(GeneratorKind::gauss_linear, 10, 2, 0.3, 1);
  auto text = format_dataset(S);
  text = text.substr(0, text.size() / 2);
  text = text.substr(0, text.rfind('\n') + 1);
  try {
    parse_dataset(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::malformed_file);
  }
}

TEST(DatasetFile, ShortLineAndBadHeaderAreMalformed) {
  EXPECT_THROW(parse_dataset(""), Error);
  EXPECT_THROW(parse_dataset("2 2\n1 0 0\n1 0 0\n"), Error);
  EXPECT_THROW(parse_dataset("2 2 1\n1 0 0\n1 0\n"), Error);
}

TEST(DatasetFile, MissingFileIsIoError) {
  try {
    load_dataset(temp_path("does_not_exist.txt"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::io_error);
  }
}

TEST(Dataset, ConstructorEnforcesInvariants) {
  Sample a{Vec::Ones(2), 1.0};
  Sample b{Vec::Ones(3), 1.0};
  EXPECT_THROW(Dataset({a}, 10.0), Error);
  EXPECT_THROW(Dataset({a, b}, 10.0), Error);
  EXPECT_THROW(Dataset({a, a}, 1.0), Error);  // |x| = sqrt 2 > 1
  EXPECT_NO_THROW(Dataset({a, a}, std::sqrt(2.0)));
}

}  // namespace
}  // namespace pairstab
