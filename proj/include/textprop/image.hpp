#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "textprop/box.hpp"

namespace textprop {

/// Dense row-major single-channel image: rows = height, cols = width.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 8-bit intensity channel.
using Raster = Image<std::uint8_t>;

struct RgbImage {
  Raster r;
  Raster g;
  Raster b;

  int width() const { return static_cast<int>(r.cols()); }
  int height() const { return static_cast<int>(r.rows()); }
};

enum class ChannelId { R, G, B, I };

char channel_letter(ChannelId id);
ChannelId channel_from_letter(char c);

/// One decomposed channel at one pyramid level. `scale` maps level
/// coordinates to level-1 coordinates (1 or 2).
struct Channel {
  ChannelId id;
  int level;
  int scale;
  Raster raster;
};

struct ChannelSet {
  int width;   // level-1 width
  int height;  // level-1 height
  std::vector<Channel> channels;
};

/// Decodes PNG, JPEG or binary PPM into three 8-bit planes.
/// Throws IoError when the file is missing and FormatError when it cannot be decoded.
RgbImage load_image(const std::filesystem::path& path);

/// Writes an RGB image as PNG/PPM (by extension). Used by tools and tests.
void save_image(const RgbImage& image, const std::filesystem::path& path);

/// Rec.601 luma, rounded to nearest.
Raster to_gray(const RgbImage& rgb);

/// Half-resolution 2x2 box filter; odd trailing rows/columns are replicated.
Raster downsample2(const Raster& raster);

Raster invert(const Raster& raster);

/// Builds every (channel, level) raster, ordered by level then channel R,G,B,I.
ChannelSet decompose(const RgbImage& rgb, const std::set<ChannelId>& channels,
                     const std::set<int>& levels);

/// Maps an inclusive pixel box at the given scale to level-1 pixels, clipped to the image.
PixelBox to_level1(const PixelBox& box, int scale, int width, int height);

}  // namespace textprop
