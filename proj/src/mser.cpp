#include "textprop/mser.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "textprop/error.hpp"

namespace textprop {

void MserParams::validate() const {
  if (delta < 1) throw ArgumentError("mser: delta must be >= 1");
  if (!(min_area > 0.0 && min_area < max_area && max_area <= 1.0))
    throw ArgumentError("mser: require 0 < min_area < max_area <= 1");
  if (!(max_variation > 0.0)) throw ArgumentError("mser: max_variation must be > 0");
}

namespace {

// Min-tree of `values` (components of {v <= t}) following Berger et al.'s
// union-find construction. After canonicalization parent[p] is the canonical
// pixel of the node p belongs to (or of its parent node when p is canonical).
struct ComponentTree {
  std::vector<int> order;   // pixels sorted by value, ties by index
  std::vector<int> parent;  // canonicalized
  std::vector<int> area;    // valid at canonical pixels
  int root = -1;

  bool canonical(int p, const std::uint8_t* v) const {
    return parent[p] == p || v[parent[p]] != v[p];
  }
};

int find_root(std::vector<int>& zpar, int p) {
  int r = p;
  while (zpar[r] != r) r = zpar[r];
  while (zpar[p] != r) {
    const int next = zpar[p];
    zpar[p] = r;
    p = next;
  }
  return r;
}

ComponentTree build_min_tree(const std::uint8_t* v, int width, int height) {
  const int n = width * height;
  ComponentTree tree;

  std::array<int, 257> offset{};
  for (int p = 0; p < n; ++p) ++offset[v[p] + 1];
  std::partial_sum(offset.begin(), offset.end(), offset.begin());
  tree.order.resize(n);
  for (int p = 0; p < n; ++p) tree.order[offset[v[p]]++] = p;

  tree.parent.assign(n, -1);
  std::vector<int> zpar(n, -1);
  for (int p : tree.order) {
    tree.parent[p] = p;
    zpar[p] = p;
    const int x = p % width;
    const int y = p / width;
    const int neighbors[4] = {x > 0 ? p - 1 : -1, x + 1 < width ? p + 1 : -1,
                              y > 0 ? p - width : -1, y + 1 < height ? p + width : -1};
    for (int q : neighbors) {
      if (q < 0 || zpar[q] < 0) continue;
      const int r = find_root(zpar, q);
      if (r != p) {
        tree.parent[r] = p;
        zpar[r] = p;
      }
    }
  }
  tree.root = tree.order.back();

  for (int i = n - 1; i >= 0; --i) {
    const int p = tree.order[i];
    const int q = tree.parent[p];
    if (v[tree.parent[q]] == v[q]) tree.parent[p] = tree.parent[q];
  }

  tree.area.assign(n, 1);
  for (int i = 0; i + 1 < n; ++i) {
    const int p = tree.order[i];
    if (p != tree.root) tree.area[tree.parent[p]] += tree.area[p];
  }
  return tree;
}

}  // namespace

std::vector<Region> extract_mser(const Raster& raster, const MserParams& params, Polarity polarity) {
  params.validate();
  const int width = static_cast<int>(raster.cols());
  const int height = static_cast<int>(raster.rows());
  const int n = width * height;
  if (n == 0) return {};

  const Raster values = polarity == Polarity::DarkOnLight ? raster : invert(raster);
  const std::uint8_t* v = values.data();
  const ComponentTree tree = build_min_tree(v, width, height);

  // Node bookkeeping lives at canonical pixels.
  std::vector<double> variation(n, 0.0);
  std::vector<char> stable(n, 0);
  for (int p = 0; p < n; ++p) {
    if (!tree.canonical(p, v)) continue;
    int top = p;
    while (top != tree.root && v[tree.parent[top]] <= v[p] + params.delta) top = tree.parent[top];
    variation[p] = static_cast<double>(tree.area[top] - tree.area[p]) / tree.area[p];
    stable[p] = 1;
  }
  for (int p = 0; p < n; ++p) {
    if (!tree.canonical(p, v) || p == tree.root) continue;
    const int up = tree.parent[p];
    if (variation[p] < variation[up])
      stable[up] = 0;
    else if (variation[p] > variation[up])
      stable[p] = 0;
  }

  const double total = static_cast<double>(n);
  std::vector<int> selected;
  for (int p = 0; p < n; ++p) {
    if (!tree.canonical(p, v) || !stable[p]) continue;
    const double a = tree.area[p];
    if (a < params.min_area * total || a > params.max_area * total) continue;
    if (a == total) continue;  // the whole raster has no boundary
    if (variation[p] > params.max_variation) continue;
    selected.push_back(p);
  }
  if (selected.empty()) return {};

  // Node membership in CSR form: own pixels and child nodes per canonical pixel.
  std::vector<int> own_start(n + 1, 0), child_start(n + 1, 0);
  auto node_of = [&](int p) { return tree.canonical(p, v) ? p : tree.parent[p]; };
  for (int p = 0; p < n; ++p) {
    ++own_start[node_of(p) + 1];
    if (tree.canonical(p, v) && p != tree.root) ++child_start[tree.parent[p] + 1];
  }
  std::partial_sum(own_start.begin(), own_start.end(), own_start.begin());
  std::partial_sum(child_start.begin(), child_start.end(), child_start.begin());
  std::vector<int> own(n), children(child_start[n]);
  {
    std::vector<int> own_fill(own_start.begin(), own_start.end() - 1);
    std::vector<int> child_fill(child_start.begin(), child_start.end() - 1);
    for (int p = 0; p < n; ++p) {
      own[own_fill[node_of(p)]++] = p;
      if (tree.canonical(p, v) && p != tree.root) children[child_fill[tree.parent[p]]++] = p;
    }
  }

  std::sort(selected.begin(), selected.end(), [&](int a, int b) {
    return tree.area[a] != tree.area[b] ? tree.area[a] > tree.area[b] : a < b;
  });

  std::vector<Region> regions;
  regions.reserve(selected.size());
  std::vector<int> stack;
  std::vector<int> members;
  for (int node : selected) {
    members.clear();
    stack.assign(1, node);
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      members.insert(members.end(), own.begin() + own_start[c], own.begin() + own_start[c + 1]);
      stack.insert(stack.end(), children.begin() + child_start[c],
                   children.begin() + child_start[c + 1]);
    }
    std::sort(members.begin(), members.end());

    Region region;
    region.pixels.reserve(members.size());
    region.bbox = {width, height, -1, -1};
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int p : members) {
      const Pixel px{p % width, p / width};
      region.pixels.push_back(px);
      region.bbox = box_union(region.bbox, PixelBox{px.x, px.y, px.x, px.y});
      sum += Eigen::Vector2d(px.x, px.y);
    }
    region.centroid = sum / static_cast<double>(members.size());
    region.level = polarity == Polarity::DarkOnLight ? v[node] : 255 - v[node];
    region.polarity = polarity;
    regions.push_back(std::move(region));
  }
  return regions;
}

std::vector<Region> extract_mser_both(const Raster& raster, const MserParams& params) {
  std::vector<Region> regions = extract_mser(raster, params, Polarity::DarkOnLight);
  std::vector<Region> light = extract_mser(raster, params, Polarity::LightOnDark);
  regions.insert(regions.end(), std::make_move_iterator(light.begin()),
                 std::make_move_iterator(light.end()));
  return regions;
}

Raster region_label_raster(const std::vector<Region>& regions, int width, int height) {
  Raster labels = Raster::Zero(height, width);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto label = static_cast<std::uint8_t>(1 + i % 254);
    for (const Pixel& px : regions[i].pixels) labels(px.y, px.x) = label;
  }
  return labels;
}

}  // namespace textprop
