#pragma once

#include <span>
#include <vector>

#include "textprop/adaboost.hpp"
#include "textprop/box.hpp"
#include "textprop/grouping.hpp"
#include "textprop/image.hpp"
#include "textprop/pipeline.hpp"

namespace textprop {

struct LabeledImage {
  RgbImage image;
  std::vector<Box> words;
};

struct HarvestOptions {
  double text_iou = 0.7;      // max IoU at or above: text
  double non_text_iou = 0.2;  // max IoU at or below: non-text; in between: dropped
  std::size_t max_negatives = 50000;  // evenly strided subsample beyond this
  bool balance_classes = true;        // equal total weight per class
};

/// Labels hierarchy nodes by their best IoU against the word boxes and
/// appends their coefficient-of-variation features to `out`.
void harvest_nodes(const std::vector<Hierarchy>& hierarchies, std::span<const Box> words,
                   const HarvestOptions& options, TrainingSet& out);

/// Runs hierarchy construction on every image and harvests labeled nodes.
/// Throws ArgumentError when no ground-truth word is given.
TrainingSet harvest_training_data(std::span<const LabeledImage> dataset,
                                  const DiversificationConfig& config,
                                  const HarvestOptions& options = {});

}  // namespace textprop
