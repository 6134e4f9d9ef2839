#include "terraclass/spatial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "terraclass/simd/kernels.hpp"

namespace terraclass {
namespace {

double coord(const Vec3& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

// Bounded list of the best (d2, id) pairs, ascending.
class KnnHeap {
 public:
  KnnHeap(std::size_t k, std::vector<Neighbor>& storage) : k_(k), items_(storage) { items_.clear(); }

  bool full() const { return items_.size() == k_; }
  double worst() const { return items_.back().distance; }

  void offer(double d2, PointId id) {
    if (full()) {
      const Neighbor& w = items_.back();
      if (d2 > w.distance || (d2 == w.distance && id > w.id)) return;
      items_.pop_back();
    }
    auto pos = std::upper_bound(items_.begin(), items_.end(), Neighbor{id, d2}, [](const Neighbor& a, const Neighbor& b) {
      return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
    });
    items_.insert(pos, Neighbor{id, d2});
  }

 private:
  std::size_t k_;
  std::vector<Neighbor>& items_;  // distance field holds d2 until finalized
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) { build(points); }

KdTree::KdTree(const PointCloud& cloud) {
  const auto pos = cloud.positions();
  build(pos);
}

void KdTree::build(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("cannot index an empty point set");
  if (points.size() > std::numeric_limits<PointId>::max()) throw std::invalid_argument("too many points to index");
  ids_.resize(points.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = static_cast<PointId>(i);
  nodes_.clear();
  nodes_.reserve(2 * (points.size() / kLeafCapacity + 1));
  build_node(points, 0, static_cast<std::uint32_t>(points.size()));

  xs_.resize(ids_.size());
  ys_.resize(ids_.size());
  zs_.resize(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const Vec3& p = points[ids_[i]];
    xs_[i] = p.x;
    ys_[i] = p.y;
    zs_[i] = p.z;
  }
}

std::uint32_t KdTree::build_node(std::span<const Vec3> points, std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafCapacity) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }

  std::array<double, 3> lo{points[ids_[begin]].x, points[ids_[begin]].y, points[ids_[begin]].z};
  std::array<double, 3> hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points[ids_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], coord(p, a));
      hi[a] = std::max(hi[a], coord(p, a));
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end, [&](PointId a, PointId b) {
    const double ca = coord(points[a], axis), cb = coord(points[b], axis);
    return ca < cb || (ca == cb && a < b);
  });

  const double split = coord(points[ids_[mid]], axis);
  const std::uint32_t left = build_node(points, begin, mid);
  const std::uint32_t right = build_node(points, mid, end);
  Node& node = nodes_[index];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  node.begin = begin;
  node.end = end;
  return index;
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> out;
  knn(query, k, out);
  return out;
}

void KdTree::knn(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const {
  if (k == 0) throw std::invalid_argument("knn requires k >= 1");
  out.clear();
  if (nodes_.empty()) return;
  k = std::min(k, ids_.size());
  KnnHeap heap(k, out);
  const auto& kern = simd::active_kernels();
  std::array<double, kLeafCapacity> d2;

  // Explicit stack of (node, lower bound on squared distance).
  std::array<std::pair<std::uint32_t, double>, 64> stack;
  std::size_t top = 0;
  stack[top++] = {0, 0.0};
  while (top > 0) {
    const auto [ni, bound] = stack[--top];
    if (heap.full() && bound > heap.worst()) continue;
    const Node* node = &nodes_[ni];
    while (node->axis >= 0) {
      const double diff = coord(query, node->axis) - node->split;
      const std::uint32_t near = diff < 0 ? node->left : node->right;
      const std::uint32_t far = diff < 0 ? node->right : node->left;
      stack[top++] = {far, diff * diff};
      node = &nodes_[near];
    }
    const std::size_t n = node->end - node->begin;
    kern.squared_distances(xs_.data() + node->begin, ys_.data() + node->begin, zs_.data() + node->begin, n, query.x,
                           query.y, query.z, d2.data());
    for (std::size_t i = 0; i < n; ++i) heap.offer(d2[i], ids_[node->begin + i]);
  }
  for (auto& nb : out) nb.distance = std::sqrt(nb.distance);
}

std::vector<PointId> KdTree::radius_search(const Vec3& query, double r) const {
  if (!(r >= 0) || !std::isfinite(r)) throw std::invalid_argument("radius must be non-negative");
  std::vector<std::pair<PointId, double>> hits;
  radius_query(query, r, hits);
  std::vector<PointId> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.first);
  return out;
}

void KdTree::radius_query(const Vec3& query, double r, std::vector<std::pair<PointId, double>>& out) const {
  if (!(r >= 0) || !std::isfinite(r)) throw std::invalid_argument("radius must be non-negative");
  if (nodes_.empty()) return;
  std::array<double, kLeafCapacity> scratch;
  collect_radius(0, query, r * r, scratch.data(), out);
}

void KdTree::collect_radius(std::uint32_t ni, const Vec3& q, double r2, double* scratch,
                            std::vector<std::pair<PointId, double>>& out) const {
  const Node& node = nodes_[ni];
  if (node.axis < 0) {
    const std::size_t n = node.end - node.begin;
    simd::active_kernels().squared_distances(xs_.data() + node.begin, ys_.data() + node.begin,
                                             zs_.data() + node.begin, n, q.x, q.y, q.z, scratch);
    for (std::size_t i = 0; i < n; ++i)
      if (scratch[i] <= r2) out.emplace_back(ids_[node.begin + i], scratch[i]);
    return;
  }
  const double diff = coord(q, node.axis) - node.split;
  const std::uint32_t near = diff < 0 ? node.left : node.right;
  const std::uint32_t far = diff < 0 ? node.right : node.left;
  collect_radius(near, q, r2, scratch, out);
  if (diff * diff <= r2) collect_radius(far, q, r2, scratch, out);
}

}  // namespace terraclass
