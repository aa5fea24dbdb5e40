#pragma once

#include "touchsplat/types.hpp"

#include <cstddef>
#include <vector>

namespace touchsplat {

/// Static balanced k-d tree over 3D points. Built once, queried many
/// times; points are copied in. Exact nearest-neighbor queries with a
/// deterministic tie-break: equal distances resolve to the lower
/// original index.
class SpatialIndex {
 public:
  struct Hit {
    std::size_t index;
    double distance;  // Euclidean
  };

  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<Vec3> points);

  std::size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const Vec3& point(std::size_t i) const { return pts_[i]; }

  /// k nearest points to `q`, ordered by (distance, original index)
  /// ascending. Returns fewer than k hits only if the tree holds fewer
  /// than k points. Throws EmptySet on an empty tree.
  std::vector<Hit> nearest(const Vec3& q, std::size_t k) const;

  /// All points with |p - q| <= radius, ordered by original index.
  std::vector<std::size_t> within_radius(const Vec3& q, double radius) const;

 private:
  struct Node {
    int axis = -1;       // -1 marks a leaf
    double split = 0.0;  // splitting coordinate value
    std::size_t begin = 0, end = 0;  // leaf range into order_
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end);

  std::vector<Vec3> pts_;
  std::vector<std::size_t> order_;  // permutation of original indices
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr std::size_t kLeafSize = 16;
};

}  // namespace touchsplat
