#pragma once

#include <Eigen/Core>

#include <vector>

#include "textprop/box.hpp"
#include "textprop/image.hpp"

namespace textprop {

enum class Polarity {
  DarkOnLight,  // dark region on a lighter surround
  LightOnDark,
};

struct Pixel {
  int x;
  int y;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Region {
  std::vector<Pixel> pixels;
  PixelBox bbox;
  Eigen::Vector2d centroid;
  int level;  // threshold gray level, in the raster the region was extracted from
  Polarity polarity;
  ChannelId channel = ChannelId::I;
  int pyramid_level = 1;
};

struct MserParams {
  int delta = 2;
  double min_area = 0.00007;
  double max_area = 0.5;
  double max_variation = 0.3;

  /// Throws ArgumentError unless delta >= 1, 0 < min_area < max_area <= 1 and max_variation > 0.
  void validate() const;
};

/// Maximally stable extremal regions of one polarity, largest first.
///
/// Built from a union-find component tree. A node's variation is
/// (A(level + delta) - A(level)) / A(level), where A(level + delta) is the area of
/// its highest ancestor whose gray level does not exceed level + delta. A node is kept
/// when its variation is a local minimum along the tree, does not exceed
/// `max_variation` and its area lies in the configured fraction of the raster.
std::vector<Region> extract_mser(const Raster& raster, const MserParams& params, Polarity polarity);

/// Both polarities pooled, dark-on-light first.
std::vector<Region> extract_mser_both(const Raster& raster, const MserParams& params);

/// Label raster for debugging: 0 background, 1 + (index mod 254) for each region, painted
/// largest first so nested regions stay visible.
Raster region_label_raster(const std::vector<Region>& regions, int width, int height);

}  // namespace textprop
