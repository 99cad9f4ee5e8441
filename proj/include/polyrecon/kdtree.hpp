#pragma once

// Static 3D KD-tree. Neighbour lists are ordered by (squared distance, index)
// so ties resolve the same way on every platform.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "polyrecon/vec.hpp"

namespace polyrecon {

class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    index_.resize(points_.size());
    std::iota(index_.begin(), index_.end(), std::uint32_t{0});
    if (!points_.empty()) build(0, index_.size());
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  /// The k nearest points to `q`, nearest first. `skip` is excluded (use it
  /// for self-queries).
  std::vector<std::uint32_t> knn(const Vec3& q, std::size_t k, std::int64_t skip = -1) const {
    std::vector<std::pair<double, std::uint32_t>> heap;
    heap.reserve(k + 1);
    if (k > 0 && !nodes_.empty()) knn_search(0, q, k, skip, heap);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<std::uint32_t> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.second);
    return out;
  }

  /// Indices of all points with squared distance <= r2 from `q`, ascending index.
  std::vector<std::uint32_t> radius(const Vec3& q, double r2) const {
    std::vector<std::uint32_t> out;
    if (!nodes_.empty()) radius_search(0, q, r2, out);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 12;

  struct Node {
    std::uint32_t begin, end;
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
    Aabb box;
  };

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    Node node;
    node.begin = static_cast<std::uint32_t>(begin);
    node.end = static_cast<std::uint32_t>(end);
    for (std::size_t i = begin; i < end; ++i) node.box.extend(points_[index_[i]]);
    if (end - begin > kLeafSize) {
      const Vec3 ext = node.box.extent();
      node.axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
      const std::size_t mid = begin + (end - begin) / 2;
      const int axis = node.axis;
      std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis], pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                       });
      node.split = points_[index_[mid]][axis];
      nodes_[id] = node;
      const auto l = build(begin, mid);
      const auto r = build(mid, end);
      nodes_[id].left = l;
      nodes_[id].right = r;
    } else {
      nodes_[id] = node;
    }
    return id;
  }

  static double box_distance2(const Aabb& b, const Vec3& q) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double v = q[a] < b.lo[a] ? b.lo[a] - q[a] : (q[a] > b.hi[a] ? q[a] - b.hi[a] : 0.0);
      d += v * v;
    }
    return d;
  }

  void knn_search(std::int32_t id, const Vec3& q, std::size_t k, std::int64_t skip,
                  std::vector<std::pair<double, std::uint32_t>>& heap) const {
    const Node& n = nodes_[id];
    if (heap.size() == k && box_distance2(n.box, q) > heap.front().first) return;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t p = index_[i];
        if (static_cast<std::int64_t>(p) == skip) continue;
        const std::pair<double, std::uint32_t> e{squared_distance(points_[p], q), p};
        if (heap.size() < k) {
          heap.push_back(e);
          std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = e;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const bool left_first = q[n.axis] < n.split;
    knn_search(left_first ? n.left : n.right, q, k, skip, heap);
    knn_search(left_first ? n.right : n.left, q, k, skip, heap);
  }

  void radius_search(std::int32_t id, const Vec3& q, double r2, std::vector<std::uint32_t>& out) const {
    const Node& n = nodes_[id];
    if (box_distance2(n.box, q) > r2) return;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        if (squared_distance(points_[index_[i]], q) <= r2) out.push_back(index_[i]);
      }
      return;
    }
    radius_search(n.left, q, r2, out);
    radius_search(n.right, q, r2, out);
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> index_;
  std::vector<Node> nodes_;
};

}  // namespace polyrecon
