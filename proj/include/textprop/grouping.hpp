#pragma once

#include <Eigen/Core>

#include <array>
#include <span>
#include <string>
#include <vector>

#include "textprop/box.hpp"
#include "textprop/features.hpp"
#include "textprop/image.hpp"

namespace textprop {

/// Similarity cue: which region feature joins the centroid distance.
enum class Cue { D, F, B, G, S };

char cue_letter(Cue cue);
Cue cue_from_letter(char c);
FeatureIndex cue_feature(Cue cue);

/// A region as seen by clustering: features plus level-1 geometry.
struct GroupItem {
  FeatureVector features;
  Eigen::Vector2d center;  // level-1 pixels
  PixelBox bbox;           // level-1 pixels, inclusive
};

/// Normalization of the squared distance terms.
struct CueScale {
  double feature = 1.0;  // divisor of the feature difference
  double coord = 1.0;    // divisor of centroid differences
};

/// Default scales: coordinates by the level-1 diagonal; intensities by 255,
/// D and S by the diagonal, G by the 99th-percentile gradient magnitude.
CueScale default_cue_scale(Cue cue, double diagonal, double gradient_p99);

/// 99th percentile of a gradient magnitude image (1.0 when it is all zero).
double gradient_percentile99(const Image<float>& gradient);

/// ((fa - fb)/Sf)^2 + ((xa - xb)/norm)^2 + ((ya - yb)/norm)^2
inline double pairwise_distance(const GroupItem& a, const GroupItem& b, FeatureIndex feature,
                                const CueScale& scale) {
  const double df = (a.features[feature] - b.features[feature]) / scale.feature;
  const double dx = (a.center.x() - b.center.x()) / scale.coord;
  const double dy = (a.center.y() - b.center.y()) / scale.coord;
  return df * df + dx * dx + dy * dy;
}

/// Running count / mean / sum of squared deviations over the five region
/// features followed by the x and y centers.
struct GroupStats {
  using Vector = Eigen::Matrix<double, 7, 1>;

  double count = 0;
  Vector mean = Vector::Zero();
  Vector m2 = Vector::Zero();

  static GroupStats of(const GroupItem& item);

  /// Population standard deviation.
  Vector sigma() const;

  /// sigma / mu of the five region features; 0 where mu == 0.
  FeatureVector coefficient_of_variation() const;
};

/// Pairwise (Chan et al.) combination; the empty stats are the identity.
GroupStats merge_stats(const GroupStats& a, const GroupStats& b);

struct GroupNode {
  std::array<int, 2> children{-1, -1};  // both -1 for leaves
  int parent = -1;
  int size = 1;        // number of member regions
  int min_member = 0;  // smallest member region index
  double merge_distance = 0.0;
  PixelBox bbox;
  GroupStats stats;
  // Bounds of the members in the normalized (feature, x, y) cue space.
  Eigen::Vector3d lower;
  Eigen::Vector3d upper;

  bool is_leaf() const { return children[0] < 0; }

  /// Volume of the members' bounding box in the normalized cue space.
  double cue_volume() const { return (upper - lower).prod(); }
};

struct HierarchySource {
  ChannelId channel = ChannelId::I;
  int level = 1;
  Cue cue = Cue::D;

  std::string label() const;
  friend auto operator<=>(const HierarchySource&, const HierarchySource&) = default;
};

/// Single-linkage dendrogram. Nodes [0, n) are the leaves in input order;
/// node n + i is the result of the i-th merge; the root is the last node.
struct Hierarchy {
  std::vector<GroupNode> nodes;
  int root = -1;
  int leaf_count = 0;
  HierarchySource source;

  std::vector<int> members(int node) const;
};

/// Agglomerative single linkage under pairwise_distance until one cluster
/// remains. The globally closest pair of clusters merges first; equal distances
/// merge the pair with the lexicographically smallest (min member, min member).
/// Throws ArgumentError on empty input.
Hierarchy slc_cluster(std::span<const GroupItem> items, Cue cue, const CueScale& scale,
                      HierarchySource source = {});

}  // namespace textprop
