#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "textprop/adaboost.hpp"
#include "textprop/grouping.hpp"
#include "textprop/image.hpp"
#include "textprop/mser.hpp"
#include "textprop/ranking.hpp"

namespace textprop {

struct DiversificationConfig {
  std::set<ChannelId> channels{ChannelId::I};
  std::set<int> levels{1};
  std::set<Cue> cues{Cue::D};
  RankStrategy strategy = RankStrategy::PRNFA;
  std::uint64_t seed = 0;
  MserParams mser;
  NfaParams nfa;
  std::optional<std::size_t> max_proposals;
  std::optional<double> nms_threshold;  // off by default
  int threads = 1;

  /// Throws ArgumentError when channels, levels or cues are empty or invalid.
  void validate() const;
  /// Combination label in the usual notation, e.g. "RGB+DF" or "P2+RGBI+DFBGS".
  std::string label() const;
};

/// Named combinations: fast (RGB+DF), full (P2+RGBI+DFBGS), i-d, i-df,
/// i-dfbgs, rgbi-dfbgs. Throws ArgumentError for unknown names.
DiversificationConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// One (channel, level) segmentation: both MSER polarities with features in
/// level-1 geometry.
struct Segmentation {
  ChannelId channel;
  int level;
  int scale;
  std::vector<Region> regions;
  std::vector<GroupItem> items;
  double gradient_p99 = 1.0;
};

Segmentation segment(const Channel& channel, int width, int height, const MserParams& params);

/// Turns one region into clustering input: features on its own raster, with
/// major axis, stroke width, center and bbox mapped to level-1 pixels of a
/// width x height image.
GroupItem make_group_item(const Region& region, const RegionFeatures& features, int scale,
                          int width, int height);

/// Every hierarchy of the configuration, ordered by level, channel, cue.
/// Segmentations without regions contribute no hierarchy.
std::vector<Hierarchy> build_hierarchies(const RgbImage& image, const DiversificationConfig& config);

/// Scores for every node of one hierarchy under the configured strategy.
std::vector<double> score_hierarchy(const Hierarchy& h, const DiversificationConfig& config,
                                    const StumpEnsemble* model);

/// Full proposal generation. The CLS strategy requires a model (ArgumentError otherwise).
ProposalList propose(const RgbImage& image, const DiversificationConfig& config,
                     const StumpEnsemble* model = nullptr);
ProposalList propose(const std::filesystem::path& image, const DiversificationConfig& config,
                     const StumpEnsemble* model = nullptr);

enum class ProposalFormat { Csv, Json };

ProposalFormat proposal_format_from_name(const std::string& name);

/// CSV: header `xmin,ymin,xmax,ymax,score,strategy`, one row per proposal in
/// rank order. JSON: the same fields plus provenance.
void write_proposals(const ProposalList& list, std::ostream& out, ProposalFormat format);
void write_proposals(const ProposalList& list, const std::filesystem::path& path, ProposalFormat format);
ProposalList read_proposals_json(const std::filesystem::path& path);
/// Boxes (in rank order) from a CSV or JSON file written by write_proposals.
std::vector<Box> read_proposal_boxes(const std::filesystem::path& path);

}  // namespace textprop
