#include "textprop/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <fstream>
#include <iterator>

#include "textprop/error.hpp"

namespace textprop {

char channel_letter(ChannelId id) {
  switch (id) {
    case ChannelId::R: return 'R';
    case ChannelId::G: return 'G';
    case ChannelId::B: return 'B';
    case ChannelId::I: return 'I';
  }
  return '?';
}

ChannelId channel_from_letter(char c) {
  switch (c) {
    case 'R': case 'r': return ChannelId::R;
    case 'G': case 'g': return ChannelId::G;
    case 'B': case 'b': return ChannelId::B;
    case 'I': case 'i': return ChannelId::I;
    default: throw ArgumentError(std::string("unknown channel '") + c + "'");
  }
}

RgbImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::vector<uchar> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read image " + path.string());

  cv::Mat bgr;
  try {
    bgr = cv::imdecode(bytes, cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION);
  } catch (const cv::Exception&) {
    bgr.release();
  }
  if (bgr.empty() || bgr.type() != CV_8UC3)
    throw FormatError("unsupported or corrupt image " + path.string());

  RgbImage out{Raster(bgr.rows, bgr.cols), Raster(bgr.rows, bgr.cols), Raster(bgr.rows, bgr.cols)};
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      out.b(y, x) = row[x][0];
      out.g(y, x) = row[x][1];
      out.r(y, x) = row[x][2];
    }
  }
  return out;
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < bgr.rows; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) row[x] = {image.b(y, x), image.g(y, x), image.r(y, x)};
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw IoError("cannot write image " + path.string());
}

Raster to_gray(const RgbImage& rgb) {
  const Image<double> luma = 0.299 * rgb.r.cast<double>() + 0.587 * rgb.g.cast<double>() +
                             0.114 * rgb.b.cast<double>();
  return luma.round().min(255.0).max(0.0).cast<std::uint8_t>();
}

Raster downsample2(const Raster& raster) {
  const Eigen::Index h = raster.rows();
  const Eigen::Index w = raster.cols();
  Raster out((h + 1) / 2, (w + 1) / 2);
  for (Eigen::Index y = 0; y < out.rows(); ++y) {
    const Eigen::Index y0 = 2 * y;
    const Eigen::Index y1 = std::min(y0 + 1, h - 1);
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      const Eigen::Index x0 = 2 * x;
      const Eigen::Index x1 = std::min(x0 + 1, w - 1);
      const int sum = raster(y0, x0) + raster(y0, x1) + raster(y1, x0) + raster(y1, x1);
      out(y, x) = static_cast<std::uint8_t>((sum + 2) / 4);
    }
  }
  return out;
}

Raster invert(const Raster& raster) {
  return (255 - raster.cast<int>()).cast<std::uint8_t>();
}

ChannelSet decompose(const RgbImage& rgb, const std::set<ChannelId>& channels,
                     const std::set<int>& levels) {
  if (channels.empty()) throw ArgumentError("decompose: empty channel set");
  if (levels.empty()) throw ArgumentError("decompose: empty level set");
  for (int level : levels)
    if (level != 1 && level != 2) throw ArgumentError("decompose: pyramid level must be 1 or 2");

  ChannelSet set{rgb.width(), rgb.height(), {}};
  for (int level : levels) {
    for (ChannelId id : channels) {
      Raster base;
      switch (id) {
        case ChannelId::R: base = rgb.r; break;
        case ChannelId::G: base = rgb.g; break;
        case ChannelId::B: base = rgb.b; break;
        case ChannelId::I: base = to_gray(rgb); break;
      }
      if (level == 2) base = downsample2(base);
      set.channels.push_back({id, level, level == 2 ? 2 : 1, std::move(base)});
    }
  }
  return set;
}

PixelBox to_level1(const PixelBox& box, int scale, int width, int height) {
  if (scale == 1) return box;
  return {box.xmin * scale, box.ymin * scale, std::min(box.xmax * scale + scale - 1, width - 1),
          std::min(box.ymax * scale + scale - 1, height - 1)};
}

}  // namespace textprop
