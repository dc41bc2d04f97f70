#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "textprop/box.hpp"
#include "textprop/eval.hpp"
#include "textprop/image.hpp"

namespace textprop {

/// A generated scene: words rendered at known boxes over a textured
/// background with distractor shapes and mild Gaussian noise.
struct SyntheticScene {
  std::string id;
  RgbImage image;
  std::vector<PixelBox> words;  // tight inclusive bounds of each word's ink
  std::vector<std::string> transcriptions;
};

struct SceneOptions {
  int width = 640;
  int height = 480;
  int min_words = 4;
  int max_words = 7;
  int distractors = 6;
  double noise_sigma = 4.0;
};

SyntheticScene make_scene(std::uint64_t seed, const SceneOptions& options = {});

/// Scenes with seeds base_seed, base_seed + 1, ... and ids img_<i>.
std::vector<SyntheticScene> make_dataset(std::size_t count, std::uint64_t base_seed,
                                         const SceneOptions& options = {});

GroundTruth ground_truth_of(const std::vector<SyntheticScene>& scenes);

/// Writes img_<i>.png plus ICDAR-style gt_img_<i>.txt files into `dir`.
void write_dataset(const std::vector<SyntheticScene>& scenes, const std::filesystem::path& dir);

}  // namespace textprop
