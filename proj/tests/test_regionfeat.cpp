#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "textprop/error.hpp"
#include "textprop/features.hpp"

using namespace textprop;

namespace {

Region region_of(const Image<std::uint8_t>& mask) {
  Region region;
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x)
      if (mask(y, x)) region.pixels.push_back({x, y});
  int x0 = 1 << 30, y0 = 1 << 30, x1 = -1, y1 = -1;
  double sx = 0, sy = 0;
  for (const Pixel& p : region.pixels) {
    x0 = std::min(x0, p.x), y0 = std::min(y0, p.y), x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
    sx += p.x, sy += p.y;
  }
  region.bbox = {x0, y0, x1, y1};
  region.centroid = {sx / region.pixels.size(), sy / region.pixels.size()};
  region.level = 0;
  region.polarity = Polarity::DarkOnLight;
  return region;
}

// Squared distance to the nearest zero pixel, pixels outside the array being zero.
Image<float> brute_force_sdt(const Image<std::uint8_t>& mask) {
  const int h = static_cast<int>(mask.rows()), w = static_cast<int>(mask.cols());
  Image<float> out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) {
        out(y, x) = 0;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int v = -1; v <= h; ++v)
        for (int u = -1; u <= w; ++u) {
          const bool zero = u < 0 || v < 0 || u >= w || v >= h || !mask(v, u);
          if (zero) best = std::min(best, double((u - x) * (u - x) + (v - y) * (v - y)));
        }
      out(y, x) = static_cast<float>(best);
    }
  return out;
}

}  // namespace

TEST(RegionFeatures, SinglePixel) {
  Raster r = Raster::Constant(5, 5, 200);
  r(2, 2) = 50;
  Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(5, 5);
  mask(2, 2) = 1;
  const RegionFeatures f = compute_features(region_of(mask), r);
  EXPECT_DOUBLE_EQ(f.intensity_mean, 50.0);
  EXPECT_DOUBLE_EQ(f.boundary_intensity_mean, 200.0);
  EXPECT_DOUBLE_EQ(f.major_axis, 1.0);
}

TEST(RegionFeatures, ThreeByElevenBar) {
  Raster r = Raster::Constant(15, 21, 255);
  r.block(6, 5, 3, 11).setZero();
  Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(15, 21);
  mask.block(6, 5, 3, 11).setOnes();
  const RegionFeatures f = compute_features(region_of(mask), r);
  EXPECT_NEAR(f.stroke_width_mean, 3.0, 0.5);
  EXPECT_NEAR(f.major_axis, 11.0, 1.5);
  EXPECT_DOUBLE_EQ(f.intensity_mean, 0.0);
  EXPECT_DOUBLE_EQ(f.boundary_intensity_mean, 255.0);
}

TEST(RegionFeatures, UniformRasterHasZeroBorderGradient) {
  const Raster r = Raster::Constant(10, 10, 90);
  Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(10, 10);
  mask.block(2, 3, 4, 5).setOnes();
  const RegionFeatures f = compute_features(region_of(mask), r);
  EXPECT_DOUBLE_EQ(f.border_gradient_mean, 0.0);
  EXPECT_DOUBLE_EQ(f.intensity_mean, 90.0);
}

TEST(RegionFeatures, BorderGradientOnStepEdge) {
  // Left half 0, right half 100: central differences give 50 on both sides of the edge.
  Raster r = Raster::Zero(6, 8);
  r.rightCols(4).setConstant(100);
  Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(6, 8);
  mask.rightCols(4).setOnes();
  const Image<float> grad = gradient_magnitude(r);
  EXPECT_FLOAT_EQ(grad(2, 3), 50.0f);
  EXPECT_FLOAT_EQ(grad(2, 4), 50.0f);
  EXPECT_FLOAT_EQ(grad(2, 6), 0.0f);
  // Border pixels of the region: column 4 (touching the dark half) only have gradient.
  const RegionFeatures f = compute_features(region_of(mask), r);
  EXPECT_GT(f.border_gradient_mean, 0.0);
  EXPECT_LE(f.border_gradient_mean, 50.0);
}

TEST(RegionFeatures, OutOfBoundsRegionRejected) {
  Region region;
  region.pixels = {{0, 0}, {7, 0}};
  region.bbox = {0, 0, 7, 0};
  region.centroid = {3.5, 0};
  region.level = 0;
  region.polarity = Polarity::DarkOnLight;
  EXPECT_THROW(compute_features(region, Raster::Zero(4, 4)), ArgumentError);
  Region empty;
  EXPECT_THROW(compute_features(empty, Raster::Zero(4, 4)), ArgumentError);
}

TEST(DistanceTransform, MatchesBruteForce) {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 3 + static_cast<int>(rng() % 12), w = 3 + static_cast<int>(rng() % 12);
    Image<std::uint8_t> mask(h, w);
    for (int i = 0; i < mask.size(); ++i) mask(i) = rng() % 5 != 0;
    const Image<float> fast = squared_distance_transform(mask);
    const Image<float> slow = brute_force_sdt(mask);
    ASSERT_TRUE((fast == slow).all()) << "trial " << trial;
  }
}

TEST(StrokeWidth, StraightBarsOfEachWidth) {
  for (int width = 1; width <= 7; ++width) {
    Image<std::uint8_t> mask = Image<std::uint8_t>::Zero(40, width + 6);
    mask.block(3, 3, 34, width).setOnes();
    EXPECT_NEAR(mean_stroke_width(mask), width, 0.35) << "width " << width;
  }
}

TEST(MajorAxis, SegmentLengthIsExact) {
  for (int len = 1; len <= 25; ++len) {
    std::vector<Pixel> horizontal, vertical;
    for (int i = 0; i < len; ++i) {
      horizontal.push_back({i, 0});
      vertical.push_back({3, i});
    }
    EXPECT_NEAR(major_axis_length(horizontal), len, 1e-9);
    EXPECT_NEAR(major_axis_length(vertical), len, 1e-9);
  }
}

TEST(RegionFeatures, InvariantsOnMserRegions) {
  std::mt19937 rng(8);
  Raster r(60, 80);
  for (int i = 0; i < r.size(); ++i) r(i) = static_cast<std::uint8_t>(140 + rng() % 30);
  for (int k = 0; k < 8; ++k) {
    const int x = static_cast<int>(rng() % 70), y = static_cast<int>(rng() % 50);
    r.block(y, x, 2 + rng() % 8, 2 + rng() % 10).setConstant(static_cast<std::uint8_t>(rng() % 60));
  }
  const double diagonal = std::hypot(80.0, 60.0);
  const auto regions = extract_mser_both(r, MserParams{2, 0.001, 0.5, 0.5});
  ASSERT_FALSE(regions.empty());
  const Image<float> grad = gradient_magnitude(r);
  for (const Region& region : regions) {
    const RegionFeatures f = compute_features(region, r, grad);
    const FeatureVector v = f.vector();
    EXPECT_TRUE(v.allFinite());
    EXPECT_TRUE((v.array() >= 0).all());
    EXPECT_LE(f.intensity_mean, 255.0);
    EXPECT_LE(f.boundary_intensity_mean, 255.0);
    EXPECT_LE(f.major_axis, diagonal);
    const int bw = region.bbox.width() + 1, bh = region.bbox.height() + 1;
    EXPECT_LE(f.stroke_width_mean, std::min(bw, bh) + 2);
    const RegionFeatures again = compute_features(region, r);
    EXPECT_EQ(again.vector(), v);
  }
}
