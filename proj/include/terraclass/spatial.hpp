#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/types.hpp"

namespace terraclass {

struct Neighbor {
  PointId id = 0;
  double distance = 0.0;  // Euclidean, meters
};

/// Immutable 3D kd-tree with exact k-NN and closed-ball radius queries.
///
/// Nodes split the widest-spread axis at the median; leaves hold at most
/// kLeafCapacity points. Coordinates are copied into leaf-ordered arrays, so
/// the index does not reference the source cloud after construction.
/// Queries are const and safe to run concurrently.
class KdTree {
 public:
  static constexpr std::size_t kLeafCapacity = 16;

  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);
  explicit KdTree(const PointCloud& cloud);

  std::size_t size() const { return ids_.size(); }

  /// min(k, size()) nearest points, ascending by distance, ties by id.
  std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;
  /// Same, writing into `out` (resized) to avoid allocations in hot loops.
  void knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const;

  /// Ids of all points with squared distance <= r*r, in traversal order.
  std::vector<PointId> radius_search(const Vec3& query, double r) const;

  /// Appends (id, squared distance) for every point within the closed ball.
  void radius_query(const Vec3& query, double r, std::vector<std::pair<PointId, double>>& out) const;

  struct Node {
    // Internal: axis 0..2, children at left/right. Leaf: axis == -1 and the
    // points are [begin, end) of the leaf-ordered arrays.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t left = 0, right = 0;
    std::uint32_t begin = 0, end = 0;
  };

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const PointId> leaf_order_ids() const { return ids_; }

 private:
  void build(std::span<const Vec3> points);
  std::uint32_t build_node(std::span<const Vec3> points, std::uint32_t begin, std::uint32_t end);
  void collect_radius(std::uint32_t node, const Vec3& q, double r2, double* scratch,
                      std::vector<std::pair<PointId, double>>& out) const;

  std::vector<Node> nodes_;
  std::vector<PointId> ids_;
  std::vector<double> xs_, ys_, zs_;
};

}  // namespace terraclass
