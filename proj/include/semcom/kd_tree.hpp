#pragma once

#include "semcom/camera.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace semcom {

/// Static median-split k-d tree over 3D points. Nearest-neighbor queries
/// compute squared distances with the same expression as a linear scan, so
/// the minima are bit-identical to exhaustive search.
class KdTree3 {
public:
  explicit KdTree3(const std::vector<Vec3>& points) : points_(points) {
    index_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) index_[i] = int(i);
    nodes_.reserve(points.size());
    if (!points_.empty()) root_ = build(0, int(points_.size()), 0);
  }

  /// Squared distance to the nearest stored point.
  double nearest_sq(const Vec3& query) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, query, best);
    return best;
  }

private:
  struct Node {
    int axis = 0;
    int point = -1;
    int left = -1, right = -1;
  };

  static double dist_sq(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
  }

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + lo, index_.begin() + mid,
                     index_.begin() + hi, [&](int a, int b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    Node node;
    node.axis = axis;
    node.point = index_[mid];
    const int self = int(nodes_.size());
    nodes_.push_back(node);
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid + 1, hi, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void search(int node_idx, const Vec3& query, double& best) const {
    if (node_idx < 0) return;
    const Node& node = nodes_[node_idx];
    const double d = dist_sq(query, points_[node.point]);
    if (d < best) best = d;
    const double delta = query[node.axis] - points_[node.point][node.axis];
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, best);
    if (delta * delta < best) search(far, query, best);
  }

  std::vector<Vec3> points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

} // namespace semcom
