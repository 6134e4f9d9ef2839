#include "terraclass/geomfeat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace terraclass {
namespace {

constexpr double kDegenerateTrace = 1e-15;
constexpr int kMaxSweeps = 50;

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

Vec3 column(const std::array<std::array<double, 3>, 3>& v, int c) { return {v[0][c], v[1][c], v[2][c]}; }

// Flip so the largest-magnitude component is positive.
Vec3 canonical_sign(Vec3 e) {
  const double ax = std::abs(e.x), ay = std::abs(e.y), az = std::abs(e.z);
  const double lead = (ax >= ay && ax >= az) ? e.x : (ay >= az ? e.y : e.z);
  return lead < 0 ? e * -1.0 : e;
}

double entropy_term(double l) { return l > 0 ? l * std::log(l) : 0.0; }

}  // namespace

Covariance covariance_tensor(std::span<const Vec3> pts) {
  if (pts.empty()) throw std::invalid_argument("covariance of an empty neighborhood");
  const std::size_t k = pts.size();

  std::size_t best = 0;
  double best_sum = 0.0;
  if (k > 1) {
    // Pairwise distances are symmetric bit for bit, so each is computed once.
    std::array<double, 32 * 32> small;  // written before read
    std::vector<double> large;
    double* dist = small.data();
    if (k > 32) {
      large.resize(k * k);
      dist = large.data();
    }
    for (std::size_t i = 0; i < k; ++i) {
      dist[i * k + i] = 0.0;
      for (std::size_t j = i + 1; j < k; ++j) dist[i * k + j] = dist[j * k + i] = std::sqrt(squared_distance(pts[i], pts[j]));
    }
    for (std::size_t j = 0; j < k; ++j) {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += dist[i * k + j];
      if (j == 0 || sum < best_sum) {
        best_sum = sum;
        best = j;
      }
    }
  }

  const Vec3 m = pts[best];
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  for (const Vec3& p : pts) {
    const Vec3 d = p - m;
    xx += d.x * d.x;
    xy += d.x * d.y;
    xz += d.x * d.z;
    yy += d.y * d.y;
    yz += d.y * d.z;
    zz += d.z * d.z;
  }
  const double count = static_cast<double>(k);
  Covariance out;
  out.medoid = m;
  out.medoid_index = best;
  Mat3& c = out.matrix;
  c(0, 0) = xx / count;
  c(1, 1) = yy / count;
  c(2, 2) = zz / count;
  c(0, 1) = c(1, 0) = xy / count;
  c(0, 2) = c(2, 0) = xz / count;
  c(1, 2) = c(2, 1) = yz / count;
  return out;
}

EigenDecomp3 eig3(const Mat3& c) {
  double scale = 0.0;
  for (double v : c.m) {
    if (!std::isfinite(v)) throw std::invalid_argument("eig3: non-finite matrix entry");
    scale = std::max(scale, std::abs(v));
  }
  const double tol = 1e-12 * std::max(1.0, scale);
  for (int r = 0; r < 3; ++r)
    for (int q = r + 1; q < 3; ++q)
      if (std::abs(c(r, q) - c(q, r)) > tol) throw std::invalid_argument("eig3: matrix is not symmetric");

  EigenDecomp3 out;
  const double trace = c(0, 0) + c(1, 1) + c(2, 2);
  if (trace <= kDegenerateTrace) {
    out.degenerate = true;
    out.raw = {c(0, 0), c(1, 1), c(2, 2)};
    out.vectors = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    return out;
  }

  std::array<std::array<double, 3>, 3> a;
  for (int r = 0; r < 3; ++r)
    for (int q = 0; q < 3; ++q) a[r][q] = 0.5 * (c(r, q) + c(q, r));
  std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  constexpr int kPairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (a[0][1] == 0.0 && a[0][2] == 0.0 && a[1][2] == 0.0) break;
    for (const auto& pair : kPairs) {
      const int p = pair[0], q = pair[1], r = pair[2];
      const double apq = a[p][q];
      if (apq == 0.0) continue;
      // Off-diagonal below the precision of both diagonal entries: drop it.
      const double g = 100.0 * std::abs(apq);
      if (sweep > 3 && std::abs(a[p][p]) + g == std::abs(a[p][p]) && std::abs(a[q][q]) + g == std::abs(a[q][q])) {
        a[p][q] = a[q][p] = 0.0;
        continue;
      }
      const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
      double t;
      if (std::abs(theta) > 1e150) {
        t = 1.0 / (2.0 * theta);
      } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0) t = -t;
      }
      const double cs = 1.0 / std::sqrt(t * t + 1.0);
      const double sn = t * cs;
      const double tau = sn / (1.0 + cs);

      a[p][p] -= t * apq;
      a[q][q] += t * apq;
      a[p][q] = a[q][p] = 0.0;
      const double arp = a[r][p], arq = a[r][q];
      a[r][p] = a[p][r] = arp - sn * (arq + tau * arp);
      a[r][q] = a[q][r] = arq + sn * (arp - tau * arq);
      for (int row = 0; row < 3; ++row) {
        const double vp = v[row][p], vq = v[row][q];
        v[row][p] = vp - sn * (vq + tau * vp);
        v[row][q] = vq + sn * (vp - tau * vq);
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j] || (a[i][i] == a[j][j] && i < j); });

  double sum = 0.0;
  std::array<double, 3> clamped;
  for (int i = 0; i < 3; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    out.raw[i] = a[src][src];
    out.vectors[i] = canonical_sign(column(v, src));
    clamped[i] = std::max(0.0, out.raw[i]);
    sum += clamped[i];
  }
  for (int i = 0; i < 3; ++i) out.values[i] = clamped[i] / sum;
  return out;
}

std::array<double, kGeomFeatureCount> GeomFeatures::as_array() const {
  return {omnivariance, eigenentropy, anisotropy,   planarity,      linearity,
          surface_variation, scatter, verticality,  moment1_e1,     moment1_e2,
          moment2_e1,   moment2_e2,   vertical_range, height_below, height_above};
}

const std::array<std::string_view, kGeomFeatureCount>& geom_feature_names() {
  static constexpr std::array<std::string_view, kGeomFeatureCount> names = {
      "omnivariance", "eigenentropy", "anisotropy", "planarity",      "linearity",
      "surface_variation", "scatter", "verticality", "moment1_e1",    "moment1_e2",
      "moment2_e1",   "moment2_e2",   "vertical_range", "height_below", "height_above"};
  return names;
}

std::vector<std::string> geom_column_names(std::size_t n_levels) {
  std::vector<std::string> out;
  out.reserve(n_levels * kGeomFeatureCount);
  for (std::size_t level = 0; level < n_levels; ++level)
    for (auto name : geom_feature_names()) out.push_back(std::string(name) + "@s" + std::to_string(level));
  return out;
}

GeomFeatures neighborhood_features(std::span<const Vec3> neighborhood, double query_z) {
  if (neighborhood.empty()) throw std::invalid_argument("empty neighborhood");
  thread_local std::vector<Vec3> pts;
  pts.assign(neighborhood.begin(), neighborhood.end());
  std::sort(pts.begin(), pts.end(), lex_less);

  GeomFeatures f;
  double zmin = pts.front().z, zmax = pts.front().z;
  for (const Vec3& p : pts) {
    zmin = std::min(zmin, p.z);
    zmax = std::max(zmax, p.z);
  }
  f.vertical_range = zmax - zmin;
  f.height_below = query_z - zmin;
  f.height_above = zmax - query_z;

  const Covariance cov = covariance_tensor(pts);
  const EigenDecomp3 eig = eig3(cov.matrix);
  if (eig.degenerate) return f;

  const double l1 = eig.values[0], l2 = eig.values[1], l3 = eig.values[2];
  f.omnivariance = std::cbrt(l1 * l2 * l3);
  f.eigenentropy = -(entropy_term(l1) + entropy_term(l2) + entropy_term(l3));
  f.anisotropy = (l1 - l3) / l1;
  f.planarity = (l2 - l3) / l1;
  f.linearity = (l1 - l2) / l1;
  f.surface_variation = l3;
  f.scatter = l3 / l1;
  f.verticality = 1.0 - std::abs(eig.vectors[2].z);

  double m1a = 0, m1b = 0, m2a = 0, m2b = 0;
  for (const Vec3& p : pts) {
    const Vec3 d = p - cov.medoid;
    const double pa = dot(d, eig.vectors[0]);
    const double pb = dot(d, eig.vectors[1]);
    m1a += pa;
    m1b += pb;
    m2a += pa * pa;
    m2b += pb * pb;
  }
  f.moment1_e1 = std::abs(m1a);
  f.moment1_e2 = std::abs(m1b);
  f.moment2_e1 = m2a;
  f.moment2_e2 = m2b;
  return f;
}

GeomFeatures features_single_scale(const Vec3& query, const PyramidLevel& level, std::size_t k) {
  thread_local std::vector<Neighbor> nbrs;
  thread_local std::vector<Vec3> pts;
  level.index.knn(query, k, nbrs);
  pts.clear();
  for (const auto& n : nbrs) pts.push_back(level.cloud[n.id].pos);
  return neighborhood_features(pts, query.z);
}

void features_multiscale(const Vec3& query, const ScalePyramid& pyramid, std::size_t k, std::span<double> out) {
  if (out.size() != pyramid.size() * kGeomFeatureCount)
    throw std::invalid_argument("features_multiscale: output span has the wrong length");
  for (std::size_t level = 0; level < pyramid.size(); ++level) {
    const auto values = features_single_scale(query, pyramid[level], k).as_array();
    std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(level * kGeomFeatureCount));
  }
}

std::vector<double> features_multiscale(const Vec3& query, const ScalePyramid& pyramid, std::size_t k) {
  std::vector<double> out(pyramid.size() * kGeomFeatureCount);
  features_multiscale(query, pyramid, k, out);
  return out;
}

}  // namespace terraclass
