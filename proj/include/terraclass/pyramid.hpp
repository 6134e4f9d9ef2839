#pragma once

#include <cstddef>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/spatial.hpp"

namespace terraclass {

inline constexpr double kDefaultGsd = 0.051;  // meters per pixel
inline constexpr std::size_t kDefaultLevels = 9;
inline constexpr double kDefaultLevelFactor = 2.0;

/// Base voxel size of the pyramid: four times the ground sampling distance.
double base_scale(double gsd);

struct DownsampleResult {
  PointCloud cloud;
  /// Index into the input cloud of every output point.
  std::vector<PointId> source_ids;
};

/// Keeps one point per occupied voxel of a grid anchored at the cloud's min
/// corner: the input point nearest to the voxel's centroid (ties by smaller
/// id). Output is ordered by source id; colors and labels are carried over.
DownsampleResult voxel_downsample(const PointCloud& cloud, double voxel, unsigned threads = 1);

struct PyramidLevel {
  double voxel_size = 0.0;
  PointCloud cloud;
  std::vector<PointId> source_ids;
  KdTree index;
};

/// Level i is voxel_downsample(original, s0 * factor^i) with its own index.
class ScalePyramid {
 public:
  ScalePyramid() = default;
  ScalePyramid(const PointCloud& cloud, double s0, std::size_t n_levels = kDefaultLevels,
               double factor = kDefaultLevelFactor, unsigned threads = 1);

  std::size_t size() const { return levels_.size(); }
  const PyramidLevel& operator[](std::size_t i) const { return levels_[i]; }
  const std::vector<PyramidLevel>& levels() const { return levels_; }

 private:
  std::vector<PyramidLevel> levels_;
};

}  // namespace terraclass
