#pragma once

#include <Eigen/Core>

#include "textprop/image.hpp"
#include "textprop/mser.hpp"

namespace textprop {

/// Per-region similarity features, indexed by `FeatureIndex`.
using FeatureVector = Eigen::Matrix<double, 5, 1>;

enum FeatureIndex : int {
  kIntensity = 0,          // mean gray value inside the region
  kBoundaryIntensity = 1,  // mean gray value of the 8-connected outer shell
  kMajorAxis = 2,
  kStrokeWidth = 3,
  kBorderGradient = 4,     // mean gradient magnitude on the region's border pixels
};

struct RegionFeatures {
  double intensity_mean = 0;
  double boundary_intensity_mean = 0;
  double major_axis = 0;
  double stroke_width_mean = 0;
  double border_gradient_mean = 0;

  FeatureVector vector() const {
    return (FeatureVector() << intensity_mean, boundary_intensity_mean, major_axis,
            stroke_width_mean, border_gradient_mean)
        .finished();
  }
};

/// Central-difference gradient magnitude with border replication.
Image<float> gradient_magnitude(const Raster& raster);

/// Throws ArgumentError if any region pixel falls outside the raster.
RegionFeatures compute_features(const Region& region, const Raster& raster);

/// Same, reusing a precomputed gradient_magnitude(raster).
RegionFeatures compute_features(const Region& region, const Raster& raster,
                                const Image<float>& gradient);

/// Exact squared Euclidean distance to the nearest zero pixel of `mask`
/// (pixels outside the array count as zero).
Image<float> squared_distance_transform(const Image<std::uint8_t>& mask);

/// Mean stroke width of a binary mask: ridge pixels (3x3 local maxima of the
/// distance transform) of the 2x supersampled mask, each contributing twice its
/// distance in original pixel units.
double mean_stroke_width(const Image<std::uint8_t>& mask);

/// Major axis length sqrt(12 * lambda_max + 1) of a point set, which equals w for a
/// w-pixel straight segment.
double major_axis_length(const std::vector<Pixel>& pixels);

}  // namespace textprop
