#include "textprop/synth.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "textprop/error.hpp"

namespace textprop {

namespace {

double luma(const cv::Scalar& bgr) { return 0.299 * bgr[2] + 0.587 * bgr[1] + 0.114 * bgr[0]; }

bool overlaps(const cv::Rect& a, const std::vector<cv::Rect>& others) {
  return std::any_of(others.begin(), others.end(), [&](const cv::Rect& o) { return (a & o).area() > 0; });
}

cv::Rect inflate(const cv::Rect& r, int margin) {
  return {r.x - margin, r.y - margin, r.width + 2 * margin, r.height + 2 * margin};
}

}  // namespace

SyntheticScene make_scene(std::uint64_t seed, const SceneOptions& options) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto random_color = [&] { return cv::Scalar(integer(0, 255), integer(0, 255), integer(0, 255)); };

  const int w = options.width;
  const int h = options.height;

  // Background: a base color with a linear ramp.
  cv::Scalar base;
  do base = random_color();
  while (luma(base) > 90 && luma(base) < 165);
  const double ramp_x = uniform(-25, 25);
  const double ramp_y = uniform(-25, 25);
  cv::Mat canvas(h, w, CV_64FC3);
  for (int y = 0; y < h; ++y) {
    auto* row = canvas.ptr<cv::Vec3d>(y);
    for (int x = 0; x < w; ++x) {
      const double shift = ramp_x * (x / double(w) - 0.5) + ramp_y * (y / double(h) - 0.5);
      for (int c = 0; c < 3; ++c) row[x][c] = std::clamp(base[c] + shift, 0.0, 255.0);
    }
  }

  static const std::string letters = "ABCDEFGHJKLMNPRSTUVWXYZabcdefghkmnprstuvwxyz";
  static const int fonts[] = {cv::FONT_HERSHEY_SIMPLEX, cv::FONT_HERSHEY_DUPLEX,
                              cv::FONT_HERSHEY_TRIPLEX, cv::FONT_HERSHEY_COMPLEX};

  SyntheticScene scene;
  scene.id = "scene_" + std::to_string(seed);
  std::vector<cv::Rect> taken;
  std::vector<cv::Mat> masks;
  std::vector<cv::Scalar> colors;
  const int word_count = integer(options.min_words, options.max_words);
  for (int attempt = 0; attempt < 400 && static_cast<int>(masks.size()) < word_count; ++attempt) {
    std::string word;
    const int len = integer(3, 8);
    for (int i = 0; i < len; ++i) word += letters[integer(0, static_cast<int>(letters.size()) - 1)];
    const int font = fonts[integer(0, 3)];
    const double scale = uniform(0.9, 2.2);
    const int thickness = integer(2, 4);
    int baseline = 0;
    const cv::Size size = cv::getTextSize(word, font, scale, thickness, &baseline);
    if (size.width + 20 >= w || size.height + baseline + 20 >= h) continue;
    const cv::Point origin(integer(10, w - size.width - 10), integer(size.height + 10, h - baseline - 10));

    cv::Mat mask = cv::Mat::zeros(h, w, CV_8U);
    cv::putText(mask, word, origin, font, scale, cv::Scalar(255), thickness, cv::LINE_AA);
    cv::Mat ink;
    cv::findNonZero(mask > 127, ink);
    if (ink.empty()) continue;
    const cv::Rect box = cv::boundingRect(ink);
    if (box.x < 2 || box.y < 2 || box.br().x > w - 2 || box.br().y > h - 2) continue;
    if (overlaps(inflate(box, 24), taken)) continue;

    // Contrast against the local background (black, white, or a colored ink).
    const cv::Scalar bg = cv::mean(canvas(box));
    cv::Scalar ink_color;
    const int kind = integer(0, 2);
    if (kind == 0) {
      ink_color = luma(bg) > 127 ? cv::Scalar(10, 10, 10) : cv::Scalar(245, 245, 245);
    } else {
      do ink_color = random_color();
      while (std::abs(luma(ink_color) - luma(bg)) < 90);
    }

    taken.push_back(box);
    masks.push_back(mask);
    colors.push_back(ink_color);
    scene.words.push_back({box.x, box.y, box.x + box.width - 1, box.y + box.height - 1});
    scene.transcriptions.push_back(word);
  }

  // Distractor shapes away from the words.
  for (int i = 0, placed = 0; i < 200 && placed < options.distractors; ++i) {
    const int sw = integer(15, 120);
    const int sh = integer(15, 120);
    const cv::Rect r(integer(0, w - sw - 1), integer(0, h - sh - 1), sw, sh);
    if (overlaps(inflate(r, 12), taken)) continue;
    cv::Mat layer = cv::Mat::zeros(h, w, CV_8U);
    if (integer(0, 1) == 0)
      cv::rectangle(layer, r, cv::Scalar(255), cv::FILLED, cv::LINE_AA);
    else
      cv::ellipse(layer, cv::RotatedRect(cv::Point2f(r.x + sw / 2.0f, r.y + sh / 2.0f), cv::Size2f(sw, sh), 0),
                  cv::Scalar(255), cv::FILLED, cv::LINE_AA);
    masks.insert(masks.begin(), layer);
    colors.insert(colors.begin(), random_color());
    ++placed;
  }

  for (std::size_t m = 0; m < masks.size(); ++m) {
    for (int y = 0; y < h; ++y) {
      const auto* a = masks[m].ptr<std::uint8_t>(y);
      auto* row = canvas.ptr<cv::Vec3d>(y);
      for (int x = 0; x < w; ++x) {
        if (!a[x]) continue;
        const double alpha = a[x] / 255.0;
        for (int c = 0; c < 3; ++c) row[x][c] = (1 - alpha) * row[x][c] + alpha * colors[m][c];
      }
    }
  }

  std::normal_distribution<double> noise(0.0, options.noise_sigma);
  scene.image = {Raster(h, w), Raster(h, w), Raster(h, w)};
  for (int y = 0; y < h; ++y) {
    const auto* row = canvas.ptr<cv::Vec3d>(y);
    for (int x = 0; x < w; ++x) {
      auto px = [&](int c) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(row[x][c] + noise(rng)), 0L, 255L));
      };
      scene.image.b(y, x) = px(0);
      scene.image.g(y, x) = px(1);
      scene.image.r(y, x) = px(2);
    }
  }
  return scene;
}

std::vector<SyntheticScene> make_dataset(std::size_t count, std::uint64_t base_seed,
                                         const SceneOptions& options) {
  std::vector<SyntheticScene> scenes;
  for (std::size_t i = 0; i < count; ++i) {
    scenes.push_back(make_scene(base_seed + i, options));
    scenes.back().id = "img_" + std::to_string(i + 1);
  }
  return scenes;
}

GroundTruth ground_truth_of(const std::vector<SyntheticScene>& scenes) {
  GroundTruth gt;
  for (const auto& scene : scenes) {
    auto& boxes = gt.images[scene.id];
    for (std::size_t i = 0; i < scene.words.size(); ++i)
      boxes.push_back({scene.words[i].cast<double>(), scene.transcriptions[i], false});
  }
  return gt;
}

void write_dataset(const std::vector<SyntheticScene>& scenes, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& scene : scenes) {
    save_image(scene.image, dir / (scene.id + ".png"));
    std::ofstream gt(dir / ("gt_" + scene.id + ".txt"));
    if (!gt) throw IoError("cannot write ground truth in " + dir.string());
    for (std::size_t i = 0; i < scene.words.size(); ++i) {
      const PixelBox& b = scene.words[i];
      gt << b.xmin << ", " << b.ymin << ", " << b.xmax << ", " << b.ymax << ", \"" << scene.transcriptions[i]
         << "\"\n";
    }
  }
}

}  // namespace textprop
