// Independent reference implementations used only by the tests. They favor
// obviousness over speed: brute force, direct sums, closed forms.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/evaluate.hpp"
#include "terraclass/geomfeat.hpp"
#include "terraclass/spatial.hpp"

namespace oracle {

using terraclass::Label;
using terraclass::Mat3;
using terraclass::Neighbor;
using terraclass::PointId;
using terraclass::Vec3;

inline double dist2(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Every point scored, sorted by (distance, id), first k kept.
inline std::vector<Neighbor> brute_knn(std::span<const Vec3> pts, const Vec3& q, std::size_t k) {
  std::vector<std::pair<double, PointId>> all;
  for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back(dist2(pts[i], q), static_cast<PointId>(i));
  std::sort(all.begin(), all.end());
  all.resize(std::min(k, all.size()));
  std::vector<Neighbor> out;
  for (const auto& [d2, id] : all) out.push_back({id, std::sqrt(d2)});
  return out;
}

/// Ids within the closed ball, ascending.
inline std::vector<PointId> brute_radius(std::span<const Vec3> pts, const Vec3& q, double r) {
  std::vector<PointId> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (dist2(pts[i], q) <= r * r) out.push_back(static_cast<PointId>(i));
  return out;
}

struct DirectCovariance {
  std::array<std::array<double, 3>, 3> c{};
  std::size_t medoid = 0;
};

/// Medoid by summed Euclidean distance (first minimum wins), then the mean
/// of outer products about it.
inline DirectCovariance direct_covariance(std::span<const Vec3> pts) {
  DirectCovariance out;
  double best = INFINITY;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += std::sqrt(dist2(pts[i], pts[j]));
    if (s < best) {
      best = s;
      out.medoid = j;
    }
  }
  const Vec3 m = pts[out.medoid];
  for (const Vec3& p : pts) {
    const double d[3] = {p.x - m.x, p.y - m.y, p.z - m.z};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out.c[r][c] += d[r] * d[c] / static_cast<double>(pts.size());
  }
  return out;
}

/// Eigenvalues of a symmetric 3x3 matrix from the trigonometric solution of
/// its characteristic cubic, descending.
inline std::array<double, 3> cubic_eigenvalues(const Mat3& a) {
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
  const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) + (a(2, 2) - q) * (a(2, 2) - q) + 2 * p1;
  const double p = std::sqrt(p2 / 6.0);
  if (p == 0.0) return {q, q, q};
  double b[3][3];
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b[r][c] = (a(r, c) - (r == c ? q : 0.0)) / p;
  const double det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                     b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
  const double r = std::clamp(det / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2 * p * std::cos(phi);
  const double e3 = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
  return {e1, 3 * q - e1 - e3, e3};
}

/// Decision tree grown by trying every column and every midpoint threshold
/// at every node (no sampling, no bootstrap). Same gain definition and tie
/// rules as the documented RF contract: Gini decrease, strict improvement,
/// smaller column then smaller threshold on ties.
class ExhaustiveTree {
 public:
  ExhaustiveTree(const std::vector<std::vector<float>>& x, const std::vector<Label>& y, std::size_t n_classes,
                 std::size_t max_depth)
      : x_(x), y_(y), C_(n_classes), max_depth_(max_depth) {
    std::vector<std::size_t> rows(x.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    root_ = grow(rows, 0);
  }

  std::vector<double> predict(const std::vector<float>& row) const {
    std::size_t n = root_;
    while (!nodes_[n].leaf) n = row[nodes_[n].column] < nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
    return nodes_[n].probs;
  }

  std::size_t node_count() const { return nodes_.size(); }

  static float midpoint(float lo, float hi) {
    float t = static_cast<float>((static_cast<double>(lo) + static_cast<double>(hi)) / 2.0);
    if (t <= lo) t = hi;
    return t;
  }

 private:
  struct Node {
    bool leaf = true;
    std::size_t column = 0;
    float threshold = 0;
    std::size_t left = 0, right = 0;
    std::vector<double> probs;
  };

  std::vector<double> counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> c(C_, 0.0);
    for (std::size_t r : rows) c[y_[r]] += 1.0;
    return c;
  }

  static double sum_sq(const std::vector<double>& c) {
    double s = 0;
    for (double v : c) s += v * v;
    return s;
  }

  std::size_t grow(const std::vector<std::size_t>& rows, std::size_t depth) {
    const auto c = counts(rows);
    const double n = static_cast<double>(rows.size());
    const std::size_t present = static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [](double v) { return v > 0; }));
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    if (depth < max_depth_ && present > 1 && rows.size() >= 2) {
      const double parent = sum_sq(c) / n;
      bool found = false;
      double best_gain = 0;
      std::size_t best_col = 0;
      float best_t = 0;
      for (std::size_t col = 0; col < x_[0].size(); ++col) {
        std::vector<float> vals;
        for (std::size_t r : rows) vals.push_back(x_[r][col]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
          const float t = midpoint(vals[i], vals[i + 1]);
          std::vector<double> l(C_, 0.0), r(C_, 0.0);
          double nl = 0, nr = 0;
          for (std::size_t row : rows) {
            if (x_[row][col] < t) {
              l[y_[row]] += 1;
              nl += 1;
            } else {
              r[y_[row]] += 1;
              nr += 1;
            }
          }
          const double score = sum_sq(l) / nl + sum_sq(r) / nr;
          if (!(score - parent > 1e-12 * parent)) continue;
          const double gain = (score - parent) / n;
          if (!found || gain > best_gain) {
            found = true;
            best_gain = gain;
            best_col = col;
            best_t = t;
          }
        }
      }
      if (found) {
        std::vector<std::size_t> lrows, rrows;
        for (std::size_t r : rows) (x_[r][best_col] < best_t ? lrows : rrows).push_back(r);
        const std::size_t l = grow(lrows, depth + 1);
        const std::size_t r = grow(rrows, depth + 1);
        nodes_[id].leaf = false;
        nodes_[id].column = best_col;
        nodes_[id].threshold = best_t;
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
      }
    }
    nodes_[id].probs = c;
    for (double& v : nodes_[id].probs) v /= n;
    return id;
  }

  const std::vector<std::vector<float>>& x_;
  const std::vector<Label>& y_;
  std::size_t C_;
  std::size_t max_depth_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

/// Objective of one plane by direct counting.
inline double plane_objective(const terraclass::PointCloud& cloud, double theta, double d) {
  std::array<double, terraclass::kNumClasses> total{}, pos{};
  for (const auto& p : cloud.points()) {
    if (p.label >= terraclass::kNumClasses) continue;
    total[p.label] += 1;
    if (p.pos.x * std::cos(theta) + p.pos.y * std::sin(theta) >= d) pos[p.label] += 1;
  }
  double worst = 0;
  for (std::size_t c = 0; c < terraclass::kNumClasses; ++c)
    if (total[c] > 0) worst = std::max(worst, std::abs(pos[c] / total[c] - 0.5));
  return worst;
}

struct GridBest {
  double theta = 0, offset = 0, objective = INFINITY;
};

/// Re-evaluates every plane of the documented grid: theta_k = k pi / A,
/// offsets lo + (hi - lo) j / (O - 1) over the projected extent of all points.
inline GridBest grid_search(const terraclass::PointCloud& cloud, std::size_t n_angles, std::size_t n_offsets) {
  GridBest best;
  for (std::size_t k = 0; k < n_angles; ++k) {
    const double theta = static_cast<double>(k) * std::numbers::pi / static_cast<double>(n_angles);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : cloud.points()) {
      const double v = p.pos.x * std::cos(theta) + p.pos.y * std::sin(theta);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    for (std::size_t j = 0; j < n_offsets; ++j) {
      const double d = n_offsets == 1 ? lo + (hi - lo) * 0.5
                                      : lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(n_offsets - 1));
      const double obj = plane_objective(cloud, theta, d);
      if (obj < best.objective) best = {theta, d, obj};
    }
  }
  return best;
}

}  // namespace oracle
