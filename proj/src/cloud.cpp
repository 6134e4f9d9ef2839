#include "terraclass/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "terraclass/error.hpp"

namespace terraclass {
namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "ground", "high_vegetation", "building", "road", "car", "human_made_object"};

// Legend colors: ground FFF391, high veg. 4E9A06, building EF2929,
// road 888A85, car F57900, human-made 3FF3F6.
constexpr std::array<Rgb8, kNumClasses> kPalette = {{
    {0xFF, 0xF3, 0x91},
    {0x4E, 0x9A, 0x06},
    {0xEF, 0x29, 0x29},
    {0x88, 0x8A, 0x85},
    {0xF5, 0x79, 0x00},
    {0x3F, 0xF3, 0xF6},
}};

}  // namespace

std::string_view class_name(Label label) {
  if (label < kNumClasses) return kClassNames[label];
  return "unlabeled";
}

std::optional<Label> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == name) return static_cast<Label>(i);
  if (name == "unlabeled") return kUnlabeled;
  return std::nullopt;
}

bool is_valid_label(Label label) { return label < kNumClasses || label == kUnlabeled; }

Rgb8 class_color(Label label) {
  if (label < kNumClasses) return kPalette[label];
  return {0, 0, 0};
}

PointCloud::PointCloud(std::vector<Point> points, bool has_color, bool has_labels)
    : points_(std::move(points)), has_color_(has_color), has_labels_(has_labels) {}

BoundingBox PointCloud::bounds() const {
  if (points_.empty()) throw std::invalid_argument("bounds of an empty cloud");
  BoundingBox box{points_.front().pos, points_.front().pos};
  for (const auto& p : points_) {
    box.min.x = std::min(box.min.x, p.pos.x);
    box.min.y = std::min(box.min.y, p.pos.y);
    box.min.z = std::min(box.min.z, p.pos.z);
    box.max.x = std::max(box.max.x, p.pos.x);
    box.max.y = std::max(box.max.y, p.pos.y);
    box.max.z = std::max(box.max.z, p.pos.z);
  }
  return box;
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Point& p = points_[i];
    if (!std::isfinite(p.pos.x) || !std::isfinite(p.pos.y) || !std::isfinite(p.pos.z))
      throw Error("point " + std::to_string(i) + " has a non-finite coordinate");
    for (float c : p.rgb)
      if (!(c >= 0.f && c <= 1.f))
        throw Error("point " + std::to_string(i) + " has a color channel outside [0,1]");
    if (!is_valid_label(p.label))
      throw Error("point " + std::to_string(i) + " has unknown label " + std::to_string(p.label));
  }
}

std::vector<Vec3> PointCloud::positions() const {
  std::vector<Vec3> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.pos);
  return out;
}

std::array<std::size_t, kNumClasses + 1> class_counts(const PointCloud& cloud) {
  std::array<std::size_t, kNumClasses + 1> counts{};
  for (const auto& p : cloud.points()) ++counts[p.label < kNumClasses ? p.label : kNumClasses];
  return counts;
}

PointCloud select(const PointCloud& cloud, const std::vector<PointId>& ids) {
  std::vector<Point> pts;
  pts.reserve(ids.size());
  for (PointId id : ids) pts.push_back(cloud[id]);
  return PointCloud(std::move(pts), cloud.has_color(), cloud.has_labels());
}

}  // namespace terraclass
