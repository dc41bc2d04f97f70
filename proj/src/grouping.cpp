#include "textprop/grouping.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "textprop/error.hpp"

namespace textprop {

char cue_letter(Cue cue) {
  switch (cue) {
    case Cue::D: return 'D';
    case Cue::F: return 'F';
    case Cue::B: return 'B';
    case Cue::G: return 'G';
    case Cue::S: return 'S';
  }
  return '?';
}

Cue cue_from_letter(char c) {
  switch (c) {
    case 'D': case 'd': return Cue::D;
    case 'F': case 'f': return Cue::F;
    case 'B': case 'b': return Cue::B;
    case 'G': case 'g': return Cue::G;
    case 'S': case 's': return Cue::S;
    default: throw ArgumentError(std::string("unknown cue '") + c + "'");
  }
}

FeatureIndex cue_feature(Cue cue) {
  switch (cue) {
    case Cue::D: return kMajorAxis;
    case Cue::F: return kIntensity;
    case Cue::B: return kBoundaryIntensity;
    case Cue::G: return kBorderGradient;
    case Cue::S: return kStrokeWidth;
  }
  return kIntensity;
}

CueScale default_cue_scale(Cue cue, double diagonal, double gradient_p99) {
  CueScale scale;
  scale.coord = diagonal;
  switch (cue) {
    case Cue::F:
    case Cue::B: scale.feature = 255.0; break;
    case Cue::D:
    case Cue::S: scale.feature = diagonal; break;
    case Cue::G: scale.feature = gradient_p99 > 0.0 ? gradient_p99 : 1.0; break;
  }
  return scale;
}

double gradient_percentile99(const Image<float>& gradient) {
  if (gradient.size() == 0) return 1.0;
  std::vector<float> values(gradient.data(), gradient.data() + gradient.size());
  const auto k = static_cast<std::ptrdiff_t>(0.99 * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + k, values.end());
  const double p = values[k];
  return p > 0.0 ? p : 1.0;
}

std::string HierarchySource::label() const {
  return std::string(1, channel_letter(channel)) + std::to_string(level) + cue_letter(cue);
}

GroupStats GroupStats::of(const GroupItem& item) {
  GroupStats s;
  s.count = 1;
  s.mean << item.features, item.center;
  return s;
}

GroupStats::Vector GroupStats::sigma() const {
  if (count <= 0) return Vector::Zero();
  return (m2.array().max(0.0) / count).sqrt().matrix();
}

FeatureVector GroupStats::coefficient_of_variation() const {
  const FeatureVector mu = mean.head<5>();
  const FeatureVector sd = sigma().head<5>();
  return (mu.array() == 0.0).select(0.0, sd.array() / mu.array()).matrix();
}

GroupStats merge_stats(const GroupStats& a, const GroupStats& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  GroupStats out;
  out.count = a.count + b.count;
  const GroupStats::Vector delta = b.mean - a.mean;
  out.mean = a.mean + delta * (b.count / out.count);
  out.m2 = a.m2 + b.m2 + delta.cwiseProduct(delta) * (a.count * b.count / out.count);
  return out;
}

std::vector<int> Hierarchy::members(int node) const {
  std::vector<int> out;
  std::vector<int> stack{node};
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    if (nodes[c].is_leaf()) {
      out.push_back(c);
    } else {
      stack.push_back(nodes[c].children[1]);
      stack.push_back(nodes[c].children[0]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Edge {
  int a;
  int b;
  double distance;
};

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // The representative is always the smaller element, i.e. the cluster's minimum member.
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<int> parent_;
};

// Minimum spanning tree by Prim's algorithm on the implicit complete graph.
std::vector<Edge> minimum_spanning_tree(std::span<const GroupItem> items, FeatureIndex feature,
                                        const CueScale& scale) {
  const int n = static_cast<int>(items.size());
  std::vector<Edge> edges;
  edges.reserve(n > 0 ? n - 1 : 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> from(n, -1);
  std::vector<char> in_tree(n, 0);
  int current = 0;
  in_tree[0] = 1;
  for (int step = 1; step < n; ++step) {
    int next = -1;
    double next_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = pairwise_distance(items[current], items[j], feature, scale);
      if (d < best[j]) {
        best[j] = d;
        from[j] = current;
      }
      if (best[j] < next_d) {
        next_d = best[j];
        next = j;
      }
    }
    in_tree[next] = 1;
    edges.push_back({from[next], next, best[next]});
    current = next;
  }
  return edges;
}

}  // namespace

Hierarchy slc_cluster(std::span<const GroupItem> items, Cue cue, const CueScale& scale,
                      HierarchySource source) {
  if (items.empty()) throw ArgumentError("slc_cluster: no regions");
  const int n = static_cast<int>(items.size());
  const FeatureIndex feature = cue_feature(cue);
  source.cue = cue;

  Hierarchy h;
  h.source = source;
  h.leaf_count = n;
  h.nodes.reserve(2 * n - 1);
  for (int i = 0; i < n; ++i) {
    GroupNode leaf;
    leaf.min_member = i;
    leaf.bbox = items[i].bbox;
    leaf.stats = GroupStats::of(items[i]);
    const Eigen::Vector3d p(items[i].features[feature] / scale.feature,
                            items[i].center.x() / scale.coord, items[i].center.y() / scale.coord);
    leaf.lower = p;
    leaf.upper = p;
    h.nodes.push_back(leaf);
  }

  DisjointSets sets(n);
  std::vector<int> node_of_cluster(n);  // indexed by cluster minimum member
  std::iota(node_of_cluster.begin(), node_of_cluster.end(), 0);

  auto merge = [&](int rep_a, int rep_b, double distance) {
    if (rep_b < rep_a) std::swap(rep_a, rep_b);
    const int na = node_of_cluster[rep_a];
    const int nb = node_of_cluster[rep_b];
    GroupNode node;
    node.children = {na, nb};
    node.size = h.nodes[na].size + h.nodes[nb].size;
    node.min_member = rep_a;
    node.merge_distance = distance;
    node.bbox = box_union(h.nodes[na].bbox, h.nodes[nb].bbox);
    node.stats = merge_stats(h.nodes[na].stats, h.nodes[nb].stats);
    node.lower = h.nodes[na].lower.cwiseMin(h.nodes[nb].lower);
    node.upper = h.nodes[na].upper.cwiseMax(h.nodes[nb].upper);
    const int id = static_cast<int>(h.nodes.size());
    h.nodes[na].parent = id;
    h.nodes[nb].parent = id;
    h.nodes.push_back(node);
    node_of_cluster[sets.unite(rep_a, rep_b)] = id;
  };

  std::vector<Edge> edges = minimum_spanning_tree(items, feature, scale);
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& x, const Edge& y) { return x.distance < y.distance; });

  for (std::size_t begin = 0; begin < edges.size();) {
    std::size_t end = begin + 1;
    while (end < edges.size() && edges[end].distance == edges[begin].distance) ++end;
    const double d = edges[begin].distance;

    if (end - begin == 1) {
      merge(sets.find(edges[begin].a), sets.find(edges[begin].b), d);
      begin = end;
      continue;
    }

    // Several merges at one distance: replay them in the tie-break order over
    // every cluster pair whose linkage equals d.
    std::set<int> involved;
    for (std::size_t e = begin; e < end; ++e) {
      involved.insert(sets.find(edges[e].a));
      involved.insert(sets.find(edges[e].b));
    }
    std::vector<int> points;
    for (int i = 0; i < n; ++i)
      if (involved.count(sets.find(i))) points.push_back(i);

    std::map<int, std::set<int>> adjacency;
    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        const int ca = sets.find(points[i]);
        const int cb = sets.find(points[j]);
        if (ca == cb) continue;
        if (pairwise_distance(items[points[i]], items[points[j]], feature, scale) != d) continue;
        const auto key = std::minmax(ca, cb);
        if (pairs.insert(key).second) {
          adjacency[key.first].insert(key.second);
          adjacency[key.second].insert(key.first);
        }
      }
    }

    while (!pairs.empty()) {
      const auto [a, b] = *pairs.begin();
      merge(a, b, d);
      // Cluster b is absorbed into a; rewire b's links to a.
      for (int other : adjacency[b]) {
        pairs.erase(std::minmax(b, other));
        adjacency[other].erase(b);
        if (other == a) continue;
        if (pairs.insert(std::minmax(a, other)).second) {
          adjacency[a].insert(other);
          adjacency[other].insert(a);
        }
      }
      adjacency.erase(b);
      adjacency[a].erase(b);
    }
    begin = end;
  }

  h.root = static_cast<int>(h.nodes.size()) - 1;
  return h;
}

}  // namespace textprop
