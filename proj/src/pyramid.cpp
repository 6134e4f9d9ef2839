#include "terraclass/pyramid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "terraclass/parallel.hpp"

namespace terraclass {

double base_scale(double gsd) {
  if (!(gsd > 0) || !std::isfinite(gsd)) throw std::invalid_argument("GSD must be positive");
  return 4.0 * gsd;
}

namespace {

struct Binned {
  std::array<std::int64_t, 3> cell;
  PointId id;
  auto operator<=>(const Binned&) const = default;
};

}  // namespace

DownsampleResult voxel_downsample(const PointCloud& cloud, double voxel, unsigned threads) {
  if (!(voxel > 0) || !std::isfinite(voxel)) throw std::invalid_argument("voxel size must be positive");
  DownsampleResult result;
  result.cloud.set_has_color(cloud.has_color());
  result.cloud.set_has_labels(cloud.has_labels());
  if (cloud.empty()) return result;

  const Vec3 origin = cloud.bounds().min;
  std::vector<Binned> bins(cloud.size());
  parallel_for(cloud.size(), threads, 1 << 15, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3& p = cloud[i].pos;
      bins[i].cell = {static_cast<std::int64_t>(std::floor((p.x - origin.x) / voxel)),
                      static_cast<std::int64_t>(std::floor((p.y - origin.y) / voxel)),
                      static_cast<std::int64_t>(std::floor((p.z - origin.z) / voxel))};
      bins[i].id = static_cast<PointId>(i);
    }
  });
  std::sort(bins.begin(), bins.end());

  std::vector<PointId> chosen;
  for (std::size_t b = 0; b < bins.size();) {
    std::size_t e = b + 1;
    while (e < bins.size() && bins[e].cell == bins[b].cell) ++e;
    Vec3 sum;
    for (std::size_t i = b; i < e; ++i) sum = sum + cloud[bins[i].id].pos;
    const Vec3 centroid = sum * (1.0 / static_cast<double>(e - b));
    // Ids within a cell are ascending, so strict < keeps the smaller id on ties.
    PointId best = bins[b].id;
    double best_d2 = squared_distance(cloud[best].pos, centroid);
    for (std::size_t i = b + 1; i < e; ++i) {
      const double d2 = squared_distance(cloud[bins[i].id].pos, centroid);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = bins[i].id;
      }
    }
    chosen.push_back(best);
    b = e;
  }
  std::sort(chosen.begin(), chosen.end());
  result.cloud = select(cloud, chosen);
  result.source_ids = std::move(chosen);
  return result;
}

ScalePyramid::ScalePyramid(const PointCloud& cloud, double s0, std::size_t n_levels, double factor,
                           unsigned threads) {
  if (cloud.empty()) throw std::invalid_argument("cannot build a pyramid over an empty cloud");
  if (!(s0 > 0)) throw std::invalid_argument("base scale must be positive");
  if (n_levels < 1) throw std::invalid_argument("pyramid needs at least one level");
  if (!(factor > 1)) throw std::invalid_argument("level factor must exceed 1");
  levels_.reserve(n_levels);
  for (std::size_t i = 0; i < n_levels; ++i) {
    const double voxel = s0 * std::pow(factor, static_cast<double>(i));
    auto down = voxel_downsample(cloud, voxel, threads);
    PyramidLevel level;
    level.voxel_size = voxel;
    level.index = KdTree(down.cloud);
    level.cloud = std::move(down.cloud);
    level.source_ids = std::move(down.source_ids);
    levels_.push_back(std::move(level));
  }
}

}  // namespace terraclass
