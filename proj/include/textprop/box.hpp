#pragma once

#include <algorithm>
#include <compare>

namespace textprop {

/// Axis-aligned box (xmin, ymin, xmax, ymax). Integer boxes are inclusive
/// pixel bounds; real boxes are continuous coordinates.
template <typename Scalar>
struct BasicBox {
  Scalar xmin{};
  Scalar ymin{};
  Scalar xmax{};
  Scalar ymax{};

  Scalar width() const { return xmax - xmin; }
  Scalar height() const { return ymax - ymin; }

  bool contains(const BasicBox& other) const {
    return xmin <= other.xmin && ymin <= other.ymin && xmax >= other.xmax && ymax >= other.ymax;
  }

  template <typename Other>
  BasicBox<Other> cast() const {
    return {static_cast<Other>(xmin), static_cast<Other>(ymin), static_cast<Other>(xmax),
            static_cast<Other>(ymax)};
  }

  friend auto operator<=>(const BasicBox&, const BasicBox&) = default;
};

using PixelBox = BasicBox<int>;
using Box = BasicBox<double>;

template <typename Scalar>
BasicBox<Scalar> box_union(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  return {std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin), std::max(a.xmax, b.xmax),
          std::max(a.ymax, b.ymax)};
}

}  // namespace textprop
