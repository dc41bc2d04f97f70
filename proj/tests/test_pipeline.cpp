#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "textprop/error.hpp"
#include "textprop/eval.hpp"
#include "textprop/pipeline.hpp"
#include "textprop/synth.hpp"

using namespace textprop;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "textprop_pipeline" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines_of(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

const SyntheticScene& small_scene() {
  static const SyntheticScene scene = [] {
    SceneOptions o;
    o.width = 320;
    o.height = 240;
    o.min_words = 2;
    o.max_words = 3;
    return make_scene(99, o);
  }();
  return scene;
}

}  // namespace

TEST(Presets, LabelsAndContents) {
  EXPECT_EQ(preset("i-d").label(), "I+D");
  EXPECT_EQ(preset("i-df").label(), "I+DF");
  EXPECT_EQ(preset("i-dfbgs").label(), "I+DFBGS");
  EXPECT_EQ(preset("fast").label(), "RGB+DF");
  EXPECT_EQ(preset("rgbi-dfbgs").label(), "RGBI+DFBGS");
  EXPECT_EQ(preset("full").label(), "P2+RGBI+DFBGS");
  EXPECT_EQ(preset("full").levels, (std::set<int>{1, 2}));
  EXPECT_THROW(preset("huge"), ArgumentError);
  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
}

TEST(Config, ValidationRejectsEmptySets) {
  DiversificationConfig c;
  c.channels.clear();
  EXPECT_THROW(c.validate(), ArgumentError);
  c = DiversificationConfig{};
  c.cues.clear();
  EXPECT_THROW(c.validate(), ArgumentError);
  c = DiversificationConfig{};
  c.levels = {3};
  EXPECT_THROW(c.validate(), ArgumentError);
  c = DiversificationConfig{};
  c.threads = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Propose, BlankImageGivesNoProposals) {
  const RgbImage blank{Raster::Constant(60, 80, 128), Raster::Constant(60, 80, 128), Raster::Constant(60, 80, 128)};
  EXPECT_TRUE(propose(blank, preset("full")).proposals.empty());
}

TEST(Propose, ClassifierRankingNeedsModel) {
  DiversificationConfig c = preset("i-d");
  c.strategy = RankStrategy::CLS;
  EXPECT_THROW(propose(small_scene().image, c), ArgumentError);
}

TEST(Propose, ProposalsAreUniqueSortedAndInsideImage) {
  for (RankStrategy s : {RankStrategy::PR, RankStrategy::NFA, RankStrategy::PRNFA}) {
    DiversificationConfig c = preset("fast");
    c.strategy = s;
    c.seed = 3;
    const ProposalList list = propose(small_scene().image, c);
    ASSERT_FALSE(list.proposals.empty());
    std::set<PixelBox> seen;
    for (std::size_t i = 0; i < list.proposals.size(); ++i) {
      const Proposal& p = list.proposals[i];
      EXPECT_TRUE(seen.insert(p.bbox).second);
      EXPECT_TRUE(std::isfinite(p.score));
      EXPECT_EQ(p.strategy, s);
      EXPECT_GE(p.bbox.xmin, 0);
      EXPECT_GE(p.bbox.ymin, 0);
      EXPECT_LE(p.bbox.xmin, p.bbox.xmax);
      EXPECT_LE(p.bbox.ymin, p.bbox.ymax);
      EXPECT_LT(p.bbox.xmax, 320);
      EXPECT_LT(p.bbox.ymax, 240);
      if (i) EXPECT_LE(list.proposals[i - 1].score, p.score);
    }
  }
}

TEST(Propose, DeterministicAcrossThreadCounts) {
  DiversificationConfig c = preset("full");
  c.seed = 7;
  const ProposalList one = propose(small_scene().image, c);
  c.threads = 3;
  const ProposalList three = propose(small_scene().image, c);
  std::ostringstream a, b;
  write_proposals(one, a, ProposalFormat::Json);
  write_proposals(three, b, ProposalFormat::Json);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Propose, SeedChangesRandomizedOrderOnly) {
  DiversificationConfig c = preset("fast");
  c.strategy = RankStrategy::PR;
  c.seed = 1;
  const ProposalList a = propose(small_scene().image, c);
  c.seed = 2;
  const ProposalList b = propose(small_scene().image, c);
  std::set<PixelBox> sa, sb;
  for (const auto& p : a.proposals) sa.insert(p.bbox);
  for (const auto& p : b.proposals) sb.insert(p.bbox);
  EXPECT_EQ(sa, sb);
  bool differs = false;
  for (std::size_t i = 0; i < a.proposals.size(); ++i) differs |= a.proposals[i].bbox != b.proposals[i].bbox;
  EXPECT_TRUE(differs);
}

TEST(Propose, MaxProposalsAndNms) {
  DiversificationConfig c = preset("fast");
  c.max_proposals = 10;
  EXPECT_EQ(propose(small_scene().image, c).proposals.size(), 10u);
  c.max_proposals.reset();
  c.nms_threshold = 0.5;
  const ProposalList list = propose(small_scene().image, c);
  EXPECT_TRUE(list.nms_applied);
  for (std::size_t i = 0; i < list.proposals.size(); ++i)
    for (std::size_t j = i + 1; j < list.proposals.size(); ++j)
      EXPECT_LE(iou(list.proposals[i].bbox.cast<double>(), list.proposals[j].bbox.cast<double>()), 0.5);
}

TEST(Hierarchies, OrderedByLevelChannelCue) {
  const auto hs = build_hierarchies(small_scene().image, preset("full"));
  ASSERT_FALSE(hs.empty());
  for (std::size_t i = 1; i < hs.size(); ++i) {
    const auto& a = hs[i - 1].source;
    const auto& b = hs[i].source;
    EXPECT_LT(std::tie(a.level, a.channel, a.cue), std::tie(b.level, b.channel, b.cue));
  }
  for (const Hierarchy& h : hs) EXPECT_EQ(h.nodes.size(), static_cast<std::size_t>(2 * h.leaf_count - 1));
}

TEST(GroupItems, LevelTwoGeometryMapsToLevelOne) {
  Region region;
  region.pixels = {{2, 3}, {3, 3}, {4, 3}};
  region.bbox = {2, 3, 4, 3};
  region.centroid = {3, 3};
  region.level = 10;
  region.polarity = Polarity::DarkOnLight;
  RegionFeatures f;
  f.major_axis = 3;
  f.stroke_width_mean = 1;
  f.intensity_mean = 10;
  const GroupItem item = make_group_item(region, f, 2, 100, 100);
  EXPECT_EQ(item.bbox, (PixelBox{4, 6, 9, 7}));
  EXPECT_DOUBLE_EQ(item.center.x(), 6.5);
  EXPECT_DOUBLE_EQ(item.center.y(), 6.5);
  EXPECT_DOUBLE_EQ(item.features[kMajorAxis], 6.0);
  EXPECT_DOUBLE_EQ(item.features[kStrokeWidth], 2.0);
  EXPECT_DOUBLE_EQ(item.features[kIntensity], 10.0);
}

TEST(Writers, EmptyListIsHeaderOnlyCsv) {
  const fs::path dir = fresh_dir("empty");
  write_proposals(ProposalList{}, dir / "p.csv", ProposalFormat::Csv);
  EXPECT_EQ(lines_of(dir / "p.csv"), std::vector<std::string>{"xmin,ymin,xmax,ymax,score,strategy"});
}

TEST(Writers, OneProposalIsTwoLineCsv) {
  const fs::path dir = fresh_dir("one");
  ProposalList list;
  list.proposals.push_back({{1, 2, 3, 4}, 0.25, RankStrategy::PRNFA, {0, 5}, "I1D"});
  write_proposals(list, dir / "p.csv", ProposalFormat::Csv);
  const auto lines = lines_of(dir / "p.csv");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1], "1,2,3,4,0.25,PR-NFA");
  const auto boxes = read_proposal_boxes(dir / "p.csv");
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0], (Box{1, 2, 3, 4}));
}

TEST(Writers, JsonRoundTripIsExact) {
  DiversificationConfig c = preset("i-dfbgs");
  c.nms_threshold = 0.8;
  const ProposalList list = propose(small_scene().image, c);
  const fs::path dir = fresh_dir("json");
  write_proposals(list, dir / "p.json", ProposalFormat::Json);
  const ProposalList back = read_proposals_json(dir / "p.json");
  EXPECT_EQ(back.nms_applied, list.nms_applied);
  EXPECT_EQ(back.nms_threshold, list.nms_threshold);
  ASSERT_EQ(back.proposals.size(), list.proposals.size());
  for (std::size_t i = 0; i < list.proposals.size(); ++i) {
    EXPECT_EQ(back.proposals[i].bbox, list.proposals[i].bbox);
    EXPECT_EQ(back.proposals[i].score, list.proposals[i].score);
    EXPECT_EQ(back.proposals[i].strategy, list.proposals[i].strategy);
    EXPECT_EQ(back.proposals[i].provenance, list.proposals[i].provenance);
    EXPECT_EQ(back.proposals[i].source, list.proposals[i].source);
  }
  EXPECT_EQ(proposal_format_from_name("json"), ProposalFormat::Json);
  EXPECT_THROW(proposal_format_from_name("xml"), ArgumentError);
}

TEST(Synth, WordsInsideImageAndApart) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticScene s = make_scene(seed);
    EXPECT_EQ(s.image.width(), 640);
    EXPECT_EQ(s.image.height(), 480);
    EXPECT_GE(s.words.size(), 1u);
    EXPECT_LE(s.words.size(), 7u);
    EXPECT_EQ(s.words.size(), s.transcriptions.size());
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      const PixelBox& w = s.words[i];
      EXPECT_GE(w.xmin, 0);
      EXPECT_LT(w.xmax, 640);
      for (std::size_t j = i + 1; j < s.words.size(); ++j)
        EXPECT_EQ(iou(w.cast<double>(), s.words[j].cast<double>()), 0.0);
    }
  }
  const SyntheticScene a = make_scene(3), b = make_scene(3);
  EXPECT_TRUE((a.image.r == b.image.r).all());
}

TEST(Synth, WrittenDatasetReadsBackAsIcdar) {
  const fs::path dir = fresh_dir("synth");
  SceneOptions small;
  small.width = 200;
  small.height = 150;
  small.min_words = 1;
  small.max_words = 2;
  const auto scenes = make_dataset(2, 10, small);
  write_dataset(scenes, dir);
  const GroundTruth gt = ingest_ground_truth(dir, GroundTruthFormat::Icdar2013);
  const GroundTruth expected = ground_truth_of(scenes);
  ASSERT_EQ(gt.images.size(), expected.images.size());
  for (const auto& [id, boxes] : expected.images) {
    ASSERT_EQ(gt.images.at(id).size(), boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      EXPECT_EQ(gt.images.at(id)[i].box, boxes[i].box);
      EXPECT_EQ(gt.images.at(id)[i].transcription, boxes[i].transcription);
    }
  }
  const RgbImage img = load_image(dir / "img_1.png");
  EXPECT_TRUE((img.g == scenes[0].image.g).all());
}
