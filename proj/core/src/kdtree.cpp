#include "touchsplat/kdtree.hpp"

#include "touchsplat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace touchsplat {

SpatialIndex::SpatialIndex(std::vector<Vec3> points) : pts_(std::move(points)) {
  order_.resize(pts_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!pts_.empty()) {
    nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
    root_ = build(0, pts_.size());
  }
}

int SpatialIndex::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  Vec3 lo = pts_[order_[begin]], hi = lo;
  for (std::size_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[order_[i]]);
    hi = hi.cwiseMax(pts_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::size_t a, std::size_t b) {
                     const double ca = pts_[a](axis), cb = pts_[b](axis);
                     return ca < cb || (ca == cb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = pts_[order_[mid]](axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<SpatialIndex::Hit> SpatialIndex::nearest(const Vec3& q,
                                                     std::size_t k) const {
  if (pts_.empty()) throw EmptySet("SpatialIndex::nearest: empty index");
  if (k == 0) return {};

  // Max-heap of (squared distance, index); pair ordering gives the
  // deterministic tie-break for free.
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;

  auto consider = [&](std::size_t idx) {
    const Entry e{(pts_[idx] - q).squaredNorm(), idx};
    if (heap.size() < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
  };

  auto visit = [&](auto&& self, int node) -> void {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) consider(order_[i]);
      return;
    }
    const double delta = q(n.axis) - n.split;
    const int near = delta <= 0.0 ? n.left : n.right;
    const int far = delta <= 0.0 ? n.right : n.left;
    self(self, near);
    if (heap.size() < k || delta * delta <= heap.top().first)
      self(self, far);
  };
  visit(visit, root_);

  std::vector<Hit> out(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

std::vector<std::size_t> SpatialIndex::within_radius(const Vec3& q,
                                                     double radius) const {
  std::vector<std::size_t> out;
  if (pts_.empty() || radius < 0.0) return out;
  const double r2 = radius * radius;

  auto visit = [&](auto&& self, int node) -> void {
    const Node& n = nodes_[node];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        if ((pts_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
      }
      return;
    }
    const double delta = q(n.axis) - n.split;
    const int near = delta <= 0.0 ? n.left : n.right;
    const int far = delta <= 0.0 ? n.right : n.left;
    self(self, near);
    if (delta * delta <= r2) self(self, far);
  };
  if (root_ >= 0) visit(visit, root_);

  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace touchsplat
