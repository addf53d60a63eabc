#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "mfract/boxcount.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace mfract;
using namespace mfract::boxcount;

namespace {

BoxCountSeries make_series(std::vector<std::size_t> sizes, std::vector<std::uint64_t> counts) {
  BoxCountSeries s;
  s.surface = Surface::binary;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    s.ln_sizes.push_back(std::log(static_cast<double>(sizes[i])));
    s.ln_counts.push_back(std::log(static_cast<double>(counts[i])));
  }
  s.sizes = std::move(sizes);
  s.counts = std::move(counts);
  return s;
}

}  // namespace

TEST(BoxCountBinary, FullMaskFillsEveryCell) {
  const BoxCountSeries s = box_count_binary(fixtures::constant(64, 64, 1.0), {4, 8, 16});
  EXPECT_EQ(s.counts[1], 64u);
  EXPECT_EQ(s.counts[0], 256u);
}

TEST(BoxCountBinary, SinglePixel) {
  GrayImage img(64, 64, 0.0);
  img(37, 5) = 1.0;
  for (std::uint64_t n : box_count_binary(img, {2, 3, 5, 8, 32}).counts) EXPECT_EQ(n, 1u);
}

TEST(BoxCountBinary, PartialEdgeCellsCount) {
  GrayImage img(10, 10, 0.0);
  img(9, 9) = 1.0;
  img(0, 0) = 1.0;
  // 10 = 3 full cells + 1 partial per axis at size 3: both corners land in distinct cells.
  EXPECT_EQ(box_count_binary(img, {2, 3, 5}).counts, (std::vector<std::uint64_t>{2, 2, 2}));
}

TEST(BoxCountBinary, CarpetMatchesAnalyticCounts) {
  const BoxCountSeries s = box_count_binary(fixtures::sierpinski_carpet(5), {3, 9, 27, 81});
  // N(3^k) = 8^(5 - k)
  EXPECT_EQ(s.counts, (std::vector<std::uint64_t>{4096, 512, 64, 8}));
  const FractalDimensionEstimate e = fit_dimension(s);
  EXPECT_NEAR(e.dimension, std::log(8.0) / std::log(3.0), 1e-9);
  EXPECT_NEAR(e.r_squared, 1.0, 1e-12);
}

TEST(BoxCountBinary, CountsNonIncreasingOnNestedGrids) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    GrayImage mask(96, 80, 0.0);
    const double density = 0.001 + 0.05 * rng.uniform();
    for (double& v : mask.pixels().values()) v = rng.uniform() < density ? 1.0 : 0.0;
    mask(0, 0) = 1.0;
    const BoxCountSeries s = box_count_binary(mask, {2, 4, 8, 16, 32});
    for (std::size_t i = 1; i < s.counts.size(); ++i) EXPECT_LE(s.counts[i], s.counts[i - 1]);
  }
}

TEST(BoxCountBinary, Errors) {
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 0.0), {2, 4, 8}), Error);
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 1.0), {2, 4}), Error);
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 1.0), {2, 4, 17}), Error);
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 1.0), {1, 4, 8}), Error);
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 0.5), {2, 4, 8}), Error);
  EXPECT_THROW(box_count_binary(fixtures::constant(32, 32, 1.0), {2, 4, 4, 8}), Error);
}

TEST(BoxCountBinary, ThresholdProducesMask) {
  const GrayImage m = threshold(fixtures::step_edge(8, 8, 4), 0.5);
  EXPECT_EQ(m(0, 0), 0.0);
  EXPECT_EQ(m(0, 7), 1.0);
}

TEST(BoxCountGray, ConstantCountsCells) {
  const BoxCountSeries s = box_count_gray(fixtures::constant(100, 100, 0.3), {2, 3, 6, 12});
  for (std::size_t i = 0; i < s.sizes.size(); ++i) {
    const std::uint64_t side = (100 + s.sizes[i] - 1) / s.sizes[i];
    EXPECT_EQ(s.counts[i], side * side);
  }
}

TEST(BoxCountGray, MatchesDefinitionOracle) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage img = fixtures::fbm_texture(128, 0.4, seed);
    const std::vector<std::size_t> sizes = {2, 3, 5, 8, 13, 21};
    EXPECT_EQ(box_count_gray(img, sizes).counts, oracle::dbc_counts(img.pixels(), sizes));
  }
  const GrayImage rect = fixtures::uniform_noise(70, 45, 9);
  EXPECT_EQ(box_count_gray(rect, {2, 4, 7, 22}).counts, oracle::dbc_counts(rect.pixels(), {2, 4, 7, 22}));
}

TEST(BoxCountGray, ConstantDimensionIsTwoForManySizeLists) {
  std::mt19937_64 gen(7);
  const GrayImage img = fixtures::constant(256, 256, 0.6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> pool = default_sizes(256, 256);
    std::shuffle(pool.begin(), pool.end(), gen);
    pool.resize(4 + gen() % (pool.size() - 3));
    const FractalDimensionEstimate e = fit_dimension(box_count_gray(img, pool));
    EXPECT_NEAR(e.dimension, 2.0, 0.05);
  }
}

TEST(BoxCountGray, NoiseIsRough) {
  const GrayImage noise = fixtures::uniform_noise(256, 256, 42);
  const double d = fit_dimension(box_count_gray(noise, default_sizes(256, 256))).dimension;
  EXPECT_GT(d, 2.6);
  EXPECT_LT(d, 3.0);
  const double blurred =
      fit_dimension(box_count_gray(fixtures::gaussian_blur(noise, 1.5), default_sizes(256, 256))).dimension;
  EXPECT_GT(d, blurred);
}

TEST(BoxCountGray, TextureRange) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage img = fixtures::fbm_texture(256, 0.5, seed);
    const FractalDimensionEstimate e = fit_dimension(box_count_gray(img, default_sizes(256, 256)));
    EXPECT_GT(e.dimension, 2.0);
    EXPECT_LT(e.dimension, 3.0);
    EXPECT_TRUE(e.warnings.empty());
  }
}

TEST(BoxCountGray, AffineIntensityRescalingIsStable) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const GrayImage img = fixtures::fbm_texture(256, 0.4, 50 + seed);
    RealGrid scaled = img.pixels();
    for (double& v : scaled.values()) v = 0.1 + 0.7 * v;
    const double d0 = fit_dimension(box_count_gray(img, default_sizes(256, 256))).dimension;
    const double d1 = fit_dimension(box_count_gray(GrayImage(scaled), default_sizes(256, 256))).dimension;
    EXPECT_LT(std::abs(d0 - d1), 0.1) << "seed " << seed;
  }
}

TEST(BoxCountGray, Errors) {
  EXPECT_THROW(box_count_gray(fixtures::constant(32, 32, 0.5), {2, 4}), Error);
  EXPECT_THROW(box_count_gray(fixtures::constant(32, 32, 0.5), {2, 4, 32}), Error);
}

TEST(FitDimension, ExactPowerLaw) {
  // N = 4096 eps^-1.5 with integer counts.
  const FractalDimensionEstimate est = fit_dimension(make_series({4, 16, 64, 256}, {512, 64, 8, 1}));
  EXPECT_NEAR(est.dimension, 1.5, 1e-9);
  EXPECT_NEAR(est.r_squared, 1.0, 1e-12);
}

TEST(FitDimension, OrderInvariant) {
  const FractalDimensionEstimate a = fit_dimension(make_series({2, 4, 8, 16, 32}, {900, 230, 61, 14, 4}));
  const FractalDimensionEstimate b = fit_dimension(make_series({16, 2, 32, 8, 4}, {14, 900, 4, 61, 230}));
  EXPECT_DOUBLE_EQ(a.dimension, b.dimension);
  EXPECT_DOUBLE_EQ(a.r_squared, b.r_squared);
}

TEST(FitDimension, DegenerateSeriesFlagged) {
  const FractalDimensionEstimate e = fit_dimension(make_series({2, 4, 8}, {1, 1, 1}));
  EXPECT_TRUE(e.degenerate);
  EXPECT_EQ(e.dimension, 0.0);
  EXPECT_FALSE(e.warnings.empty());
}

TEST(FitDimension, SoftBoundsWarnInsteadOfThrowing) {
  // A slope of 2.5 on a binary series is outside [0, 2].
  const FractalDimensionEstimate e = fit_dimension(make_series({4, 16, 64}, {1024, 32, 1}));
  EXPECT_NEAR(e.dimension, 2.5, 1e-12);
  EXPECT_EQ(e.warnings.size(), 1u);
}

TEST(FitDimension, NeedsThreePoints) {
  EXPECT_THROW(fit_dimension(make_series({2, 4}, {10, 3})), Error);
}

TEST(DefaultSizes, IntersectedWithHalfSide) {
  EXPECT_EQ(default_sizes(40, 64), (std::vector<std::size_t>{2, 3, 4, 6, 8, 12, 16}));
  EXPECT_EQ(default_sizes(512, 512), kDefaultSizes);
}

TEST(FdGap, IdenticalImagesHaveNoGap) {
  const GrayImage img = fixtures::fbm_texture(128, 0.5, 3);
  const FdGap g = fd_gap(img, img);
  EXPECT_EQ(g.diff, 0.0);
  EXPECT_EQ(g.hr.dimension, g.lr.dimension);
}

TEST(FdGap, ConstantImageNearTwo) {
  const GrayImage hr = fixtures::constant(128, 128, 0.5);
  const FdGap g = fd_gap(hr, resize_bicubic(hr, Scale{1, 4}));
  EXPECT_NEAR(g.hr.dimension, 2.0, 0.05);
  EXPECT_NEAR(g.lr.dimension, 2.0, 0.05);
  EXPECT_LT(g.diff, 0.05);
}

TEST(FdGap, UserSizesClippedPerImage) {
  const GrayImage hr = fixtures::fbm_texture(128, 0.5, 4);
  const GrayImage lr = resize_bicubic(hr, Scale{1, 4});
  const FdGap g = fd_gap(hr, lr, {2, 4, 8, 16, 32});
  EXPECT_EQ(g.hr.series.sizes.size(), 5u);
  EXPECT_EQ(g.lr.series.sizes, (std::vector<std::size_t>{2, 4, 8, 16}));
  EXPECT_DOUBLE_EQ(g.diff, std::abs(g.hr.dimension - g.lr.dimension));
}

TEST(SeriesCsv, Columns) {
  test::Scratch dir("series_csv");
  const BoxCountSeries s = box_count_binary(fixtures::sierpinski_carpet(4), {3, 9, 27});
  write_series_csv(dir / "s.csv", s);
  std::ifstream in(dir / "s.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "eps,count,ln_eps,ln_count");
  EXPECT_EQ(first.substr(0, 6), "3,512,");
}
