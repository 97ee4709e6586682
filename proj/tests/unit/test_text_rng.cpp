#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pairstab/rng.hpp"
#include "pairstab/text.hpp"

namespace pairstab {
namespace {

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
    const auto back = text::parse_double(text::format_double(x));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, x);
  }
  EXPECT_EQ(text::format_double(0.1), "0.1");
  EXPECT_EQ(text::format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(ParseNumbers, RejectTrailingGarbage) {
  EXPECT_FALSE(text::parse_double("1.5x").has_value());
  EXPECT_FALSE(text::parse_int("12 3").has_value());
  EXPECT_FALSE(text::parse_int("").has_value());
  EXPECT_EQ(text::parse_int("-4").value(), -4);
}

TEST(Split, TrimsPieces) {
  const auto parts = text::split(" a , b,c ", ',');
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0], "a");
  EXPECT_EQ(parts[1], "b");
  EXPECT_EQ(parts[2], "c");
  EXPECT_EQ(text::split_ws("  x\ty  z ").size(), 3u);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(DeriveSeed, StreamsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, "trajectory"), derive_seed(1, "trajectory"));
  EXPECT_NE(derive_seed(1, "trajectory"), derive_seed(1, "probe"));
  EXPECT_NE(derive_seed(1, "trajectory"), derive_seed(2, "trajectory"));
  EXPECT_NE(derive_seed(1, "run", 0), derive_seed(1, "run", 1));
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng rng(5);
  std::vector<int> counts(7, 0);
  for (int k = 0; k < 70000; ++k) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // 5 sigma of a binomial(70000, 1/7).
  const double sigma = std::sqrt(70000.0 * (1.0 / 7) * (6.0 / 7));
  for (int c : counts) EXPECT_NEAR(c, 10000.0, 5 * sigma);
}

TEST(Rng, NormalMoments) {
  Rng rng(8);
  const int m = 200000;
  double s = 0;
  double ss = 0;
  for (int k = 0; k < m; ++k) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / m, 0.0, 5.0 / std::sqrt(m));
  EXPECT_NEAR(ss / m, 1.0, 5.0 * std::sqrt(2.0 / m));
}

}  // namespace
}  // namespace pairstab
