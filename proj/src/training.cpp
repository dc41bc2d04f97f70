#include "textprop/training.hpp"

#include <algorithm>

#include "textprop/error.hpp"
#include "textprop/eval.hpp"

namespace textprop {

void harvest_nodes(const std::vector<Hierarchy>& hierarchies, std::span<const Box> words,
                   const HarvestOptions& options, TrainingSet& out) {
  for (const Hierarchy& h : hierarchies) {
    for (const GroupNode& node : h.nodes) {
      const Box box = node.bbox.cast<double>();
      double best = 0.0;
      for (const Box& w : words) best = std::max(best, iou(box, w));
      if (best >= options.text_iou)
        out.rows.push_back({node.stats.coefficient_of_variation(), true, 1.0});
      else if (best <= options.non_text_iou)
        out.rows.push_back({node.stats.coefficient_of_variation(), false, 1.0});
    }
  }
}

TrainingSet harvest_training_data(std::span<const LabeledImage> dataset,
                                  const DiversificationConfig& config, const HarvestOptions& options) {
  std::size_t word_count = 0;
  for (const auto& item : dataset) word_count += item.words.size();
  if (word_count == 0) throw ArgumentError("harvest_training_data: no ground-truth words");

  TrainingSet all;
  for (const auto& item : dataset) harvest_nodes(build_hierarchies(item.image, config), item.words, options, all);

  TrainingSet out;
  std::vector<TrainingRow> negatives;
  for (auto& row : all.rows) (row.text ? out.rows : negatives).push_back(row);
  if (negatives.size() > options.max_negatives && options.max_negatives > 0) {
    std::vector<TrainingRow> kept;
    const double stride = static_cast<double>(negatives.size()) / static_cast<double>(options.max_negatives);
    for (std::size_t i = 0; i < options.max_negatives; ++i)
      kept.push_back(negatives[static_cast<std::size_t>(i * stride)]);
    negatives.swap(kept);
  }
  const std::size_t positives = out.rows.size();
  out.rows.insert(out.rows.end(), negatives.begin(), negatives.end());

  if (options.balance_classes && positives > 0 && !negatives.empty()) {
    const double pos_weight = 1.0 / static_cast<double>(positives);
    const double neg_weight = 1.0 / static_cast<double>(negatives.size());
    for (auto& row : out.rows) row.weight = row.text ? pos_weight : neg_weight;
  }
  return out;
}

}  // namespace textprop
