#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "terraclass/types.hpp"

namespace terraclass {

using Label = std::uint8_t;

inline constexpr Label kUnlabeled = 255;
inline constexpr std::size_t kNumClasses = 6;

// Dense class ids 0..5.
namespace cls {
inline constexpr Label ground = 0;
inline constexpr Label high_vegetation = 1;
inline constexpr Label building = 2;
inline constexpr Label road = 3;
inline constexpr Label car = 4;
inline constexpr Label human_made_object = 5;
}  // namespace cls

std::string_view class_name(Label label);
std::optional<Label> class_from_name(std::string_view name);
bool is_valid_label(Label label);

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  constexpr bool operator==(const Rgb8&) const = default;
};

/// Visualization color of a class. Unlabeled points map to black.
Rgb8 class_color(Label label);

struct Point {
  Vec3 pos;
  // Channels in [0,1].
  std::array<float, 3> rgb{0.f, 0.f, 0.f};
  Label label = kUnlabeled;
};

struct BoundingBox {
  Vec3 min;
  Vec3 max;
};

/// Ordered point set. `has_color` / `has_labels` describe what the source
/// carried; points of a colorless cloud have black color, points of an
/// unlabeled cloud carry kUnlabeled.
class PointCloud {
 public:
  PointCloud() = default;
  PointCloud(std::vector<Point> points, bool has_color, bool has_labels);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const { return points_; }

  bool has_color() const { return has_color_; }
  bool has_labels() const { return has_labels_; }

  void push_back(const Point& p) { points_.push_back(p); }
  void reserve(std::size_t n) { points_.reserve(n); }
  void set_has_color(bool v) { has_color_ = v; }
  void set_has_labels(bool v) { has_labels_ = v; }
  void set_label(std::size_t i, Label label) { points_[i].label = label; }

  /// Throws std::invalid_argument on an empty cloud.
  BoundingBox bounds() const;

  /// Checks finiteness, color range and label validity; throws Error.
  void validate() const;

  std::vector<Vec3> positions() const;

 private:
  std::vector<Point> points_;
  bool has_color_ = false;
  bool has_labels_ = false;
};

/// Number of points per class id; index kNumClasses counts unlabeled points.
std::array<std::size_t, kNumClasses + 1> class_counts(const PointCloud& cloud);

/// Subset of `cloud` in the order given by `ids`.
PointCloud select(const PointCloud& cloud, const std::vector<PointId>& ids);

}  // namespace terraclass
