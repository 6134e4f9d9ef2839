#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "terraclass/cloud.hpp"
#include "terraclass/spatial.hpp"

namespace terraclass {

inline const std::vector<double> kDefaultColorRadii = {0.4, 0.6, 0.9};

struct Hsv {
  double h = 0;  // [0,1), 0 for achromatic colors
  double s = 0;
  double v = 0;
  bool operator==(const Hsv&) const = default;
};

/// Hexcone conversion. Throws std::invalid_argument outside [0,1].
Hsv rgb_to_hsv(double r, double g, double b);

std::array<double, 3> point_color_features(const Point& point);

/// Full-resolution cloud with its kd-tree and per-point HSV, shared by all
/// neighborhood color queries.
class ColorField {
 public:
  /// Throws std::invalid_argument if the cloud carries no color.
  explicit ColorField(const PointCloud& cloud);

  const KdTree& index() const { return index_; }
  Hsv hsv(PointId id) const { return {h_[id], s_[id], v_[id]}; }
  std::size_t size() const { return h_.size(); }

 private:
  KdTree index_;
  std::vector<double> h_, s_, v_;
};

/// Arithmetic mean of the HSV triples of all points within the closed ball
/// of radius r (hue averaged linearly, no circular wrap).
std::array<double, 3> neighborhood_color_features(const Vec3& query, const ColorField& field, double r);

/// [point HSV | mean HSV at each radius]; radii must be positive and
/// ascending. Writes 3 + 3 * radii.size() values.
void color_feature_block(const Point& point, const ColorField* field, std::span<const double> radii,
                         std::span<double> out);
std::vector<double> color_feature_block(const Point& point, const ColorField* field, std::span<const double> radii);

/// "h","s","v" followed by "h@r0.4","s@r0.4","v@r0.4", ...
std::vector<std::string> color_column_names(bool point_color, std::span<const double> radii);

/// Shortest text form of a radius as used in column names ("0.4", "1").
std::string radius_tag(double r);

}  // namespace terraclass
