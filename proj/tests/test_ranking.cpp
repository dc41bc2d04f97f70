#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "oracles.hpp"
#include "textprop/adaboost.hpp"
#include "textprop/error.hpp"
#include "textprop/ranking.hpp"

using namespace textprop;

namespace {

GroupItem item(double feature, double x, double y) {
  GroupItem g;
  g.features = FeatureVector::Constant(1.0);
  g.features[kIntensity] = feature;
  g.center = {x, y};
  g.bbox = {static_cast<int>(x), static_cast<int>(y), static_cast<int>(x) + 2, static_cast<int>(y) + 2};
  return g;
}

Hierarchy three_leaf_hierarchy() {
  const std::vector<GroupItem> items{item(0, 0, 0), item(1, 0, 0), item(5, 0, 0)};
  return slc_cluster(items, Cue::F, CueScale{1.0, 1.0});
}

Proposal proposal(PixelBox box, double score, int node = 0) {
  Proposal p;
  p.bbox = box;
  p.score = score;
  p.provenance = {0, node};
  return p;
}

}  // namespace

TEST(BinomialTail, HandValues) {
  EXPECT_DOUBLE_EQ(binomial_tail(3, 3, 0.5), 0.125);
  EXPECT_DOUBLE_EQ(binomial_tail(0, 5, 0.2), 1.0);
  EXPECT_NEAR(binomial_tail(2, 4, 0.25), 0.26171875, 1e-15);
  EXPECT_DOUBLE_EQ(binomial_tail(4, 4, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(binomial_tail(1, 4, 0.0), 0.0);
}

TEST(BinomialTail, MatchesDirectSummationOnGrid) {
  const auto start = std::chrono::steady_clock::now();
  for (int n = 0; n <= 30; ++n)
    for (int k = 0; k <= n; ++k)
      for (int pi = 1; pi <= 99; ++pi) {
        const double p = pi / 100.0;
        const long double expected = oracle::binomial_tail(k, n, p);
        const double got = binomial_tail(k, n, p);
        ASSERT_LE(std::abs(got - expected), 1e-12L * expected) << k << " " << n << " " << p;
      }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(BinomialTail, LogStaysFiniteForTinyTails) {
  const double lt = log_binomial_tail(5000, 5000, 1e-6);
  EXPECT_TRUE(std::isfinite(lt));
  EXPECT_NEAR(lt, 5000 * std::log(1e-6), 1e-6);
  EXPECT_LT(log_binomial_tail(3000, 5000, 1e-6), log_binomial_tail(2000, 5000, 1e-6));
}

TEST(BinomialTail, RejectsBadArguments) {
  EXPECT_THROW(binomial_tail(5, 4, 0.5), ArgumentError);
  EXPECT_THROW(binomial_tail(-1, 4, 0.5), ArgumentError);
  EXPECT_THROW(binomial_tail(1, 4, 1.5), ArgumentError);
  EXPECT_THROW(binomial_tail(1, 4, -0.1), ArgumentError);
}

TEST(Pseudorandom, ConstantStreamGivesBreadthFirstOrdinals) {
  const Hierarchy h = three_leaf_hierarchy();
  const Uniform01 one = [] { return 1.0; };
  const auto scores = rank_pseudorandom(h, one);
  EXPECT_EQ(scores, (std::vector<double>{4, 5, 3, 2, 1}));
  EXPECT_EQ(breadth_first_ordinals(h), (std::vector<int>{4, 5, 3, 2, 1}));
}

TEST(Pseudorandom, SingleLeaf) {
  const std::vector<GroupItem> items{item(1, 1, 1)};
  const Hierarchy h = slc_cluster(items, Cue::F, CueScale{});
  const Uniform01 u = [] { return 0.37; };
  EXPECT_EQ(rank_pseudorandom(h, u), std::vector<double>{0.37});
}

TEST(Pseudorandom, FixedSeedIsReproducible) {
  const Hierarchy h = three_leaf_hierarchy();
  UniformStream a(stream_seed(7, h.source)), b(stream_seed(7, h.source));
  const Uniform01 ua = std::ref(a), ub = std::ref(b);
  EXPECT_EQ(rank_pseudorandom(h, ua), rank_pseudorandom(h, ub));
}

TEST(UniformStream, OpenUnitInterval) {
  UniformStream s(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = s();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(StreamSeed, DependsOnSourceAndMaster) {
  const HierarchySource a{ChannelId::R, 1, Cue::D}, b{ChannelId::R, 1, Cue::F}, c{ChannelId::R, 2, Cue::D};
  EXPECT_EQ(stream_seed(7, a), stream_seed(7, a));
  EXPECT_NE(stream_seed(7, a), stream_seed(7, b));
  EXPECT_NE(stream_seed(7, a), stream_seed(7, c));
  EXPECT_NE(stream_seed(7, a), stream_seed(8, a));
}

TEST(Nfa, WholeSpaceNodeScoresOne) {
  std::vector<GroupItem> items{item(0, 0, 0), item(1, 1, 1)};
  for (int i = 0; i < 6; ++i) items.push_back(item(0.1 * i + 0.2, 0.1 * i + 0.2, 0.9 - 0.1 * i));
  const Hierarchy h = slc_cluster(items, Cue::F, CueScale{1.0, 1.0});
  const auto scores = rank_nfa(h);
  EXPECT_DOUBLE_EQ(h.nodes[h.root].cue_volume(), 1.0);
  EXPECT_DOUBLE_EQ(std::exp(scores[h.root]), 1.0);
}

TEST(Nfa, CoincidentPairIsExtremelyMeaningful) {
  std::vector<GroupItem> items{item(10, 50, 50), item(10, 50, 50)};
  std::mt19937 rng(4);
  for (int i = 0; i < 8; ++i) items.push_back(item(rng() % 255, rng() % 640, rng() % 480));
  const Hierarchy h = slc_cluster(items, Cue::F, default_cue_scale(Cue::F, 800, 1));
  const int pair = h.leaf_count;  // first merge joins the two coincident leaves
  ASSERT_EQ(h.members(pair), (std::vector<int>{0, 1}));
  const auto scores = rank_nfa(h);
  const double expected = static_cast<double>(oracle::binomial_tail(2, 10, 1e-6));
  EXPECT_NEAR(std::exp(scores[pair]), expected, 1e-9 * expected);
  EXPECT_NEAR(expected, 4.5e-11, 1e-12);
  for (std::size_t i = h.leaf_count + 1; i < h.nodes.size(); ++i)
    if (h.nodes[i].size == 2) EXPECT_GT(scores[i], scores[pair]);
}

TEST(Nfa, SingletonClosedForm) {
  std::vector<GroupItem> items;
  for (int i = 0; i < 10; ++i) items.push_back(item(i * 20, i * 50, i * 30));
  const Hierarchy h = slc_cluster(items, Cue::F, default_cue_scale(Cue::F, 800, 1));
  const auto scores = rank_nfa(h);
  const double expected = 1.0 - std::pow(1.0 - 1e-6, 10);
  for (int leaf = 0; leaf < 10; ++leaf) EXPECT_NEAR(std::exp(scores[leaf]), expected, 1e-9 * expected);
}

TEST(Nfa, RandomizedVariantAddsLogUniform) {
  const Hierarchy h = three_leaf_hierarchy();
  const Uniform01 half = [] { return 0.5; };
  const auto plain = rank_nfa(h);
  const auto randomized = rank_nfa(h, NfaParams{}, &half);
  for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_DOUBLE_EQ(randomized[i], plain[i] + std::log(0.5));
}

TEST(Classifier, IdenticalRegionsGiveZeroFeatures) {
  const std::vector<GroupItem> items{item(3, 4, 4), item(3, 4, 4), item(3, 4, 4)};
  const Hierarchy h = slc_cluster(items, Cue::F, CueScale{1.0, 1.0});
  EXPECT_TRUE(h.nodes[h.root].stats.coefficient_of_variation().isZero());
  const StumpEnsemble model({Stump{kIntensity, 0.5, 2.0, -1.0}});
  for (double s : rank_classifier(h, model)) EXPECT_DOUBLE_EQ(s, -2.0);
}

TEST(Classifier, SigmaEqualsMuGivesOnes) {
  // Values {0, 2} in every feature: population sigma 1, mean 1.
  GroupItem a, b;
  a.features = FeatureVector::Zero();
  b.features = FeatureVector::Constant(2.0);
  a.center = b.center = {0, 0};
  const GroupStats s = merge_stats(GroupStats::of(a), GroupStats::of(b));
  EXPECT_TRUE(s.coefficient_of_variation().isApprox(FeatureVector::Ones()));
}

TEST(DedupAndSort, KeepsBestOfIdenticalBoxes) {
  const auto list = dedup_and_sort({proposal({0, 0, 5, 5}, 0.7), proposal({0, 0, 5, 5}, 0.2, 1)});
  ASSERT_EQ(list.proposals.size(), 1u);
  EXPECT_DOUBLE_EQ(list.proposals[0].score, 0.2);
}

TEST(DedupAndSort, EmptyInput) { EXPECT_TRUE(dedup_and_sort({}).proposals.empty()); }

TEST(DedupAndSort, SortsAscending) {
  const auto list = dedup_and_sort(
      {proposal({0, 0, 1, 1}, 3), proposal({0, 0, 2, 2}, 1), proposal({0, 0, 3, 3}, 2)});
  ASSERT_EQ(list.proposals.size(), 3u);
  EXPECT_DOUBLE_EQ(list.proposals[0].score, 1);
  EXPECT_DOUBLE_EQ(list.proposals[1].score, 2);
  EXPECT_DOUBLE_EQ(list.proposals[2].score, 3);
}

TEST(DedupAndSort, UniqueBoxesAndOrderedScoresOnRandomInput) {
  std::mt19937 rng(9);
  std::vector<Proposal> pooled;
  for (int i = 0; i < 500; ++i) {
    const int x = rng() % 10, y = rng() % 10;
    pooled.push_back(proposal({x, y, x + 1 + int(rng() % 3), y + 2}, double(rng() % 50), i));
  }
  const auto list = dedup_and_sort(pooled);
  std::set<PixelBox> seen;
  for (std::size_t i = 0; i < list.proposals.size(); ++i) {
    EXPECT_TRUE(seen.insert(list.proposals[i].bbox).second);
    if (i) EXPECT_LE(list.proposals[i - 1].score, list.proposals[i].score);
  }
  std::set<PixelBox> all;
  for (const auto& p : pooled) all.insert(p.bbox);
  EXPECT_EQ(seen, all);
}

TEST(Nms, SuppressesOverlapsWithBetterProposals) {
  auto list = dedup_and_sort(
      {proposal({0, 0, 10, 10}, 1), proposal({0, 0, 10, 11}, 2), proposal({50, 50, 60, 60}, 3)});
  const auto kept = non_maximum_suppression(list, 0.5);
  ASSERT_EQ(kept.proposals.size(), 2u);
  EXPECT_DOUBLE_EQ(kept.proposals[1].score, 3);
  EXPECT_TRUE(kept.nms_applied);
  EXPECT_DOUBLE_EQ(kept.nms_threshold, 0.5);
}

TEST(StrategyNames, RoundTrip) {
  for (RankStrategy s : {RankStrategy::PR, RankStrategy::NFA, RankStrategy::PRNFA, RankStrategy::CLS})
    EXPECT_EQ(strategy_from_name(strategy_name(s)), s);
  EXPECT_EQ(strategy_from_name("prnfa"), RankStrategy::PRNFA);
  EXPECT_THROW(strategy_from_name("best"), ArgumentError);
}
