#include "terraclass/colorfeat.hpp"

#include <charconv>
#include <stdexcept>

#include "simd/scalar_math.hpp"
#include "terraclass/simd/kernels.hpp"

namespace terraclass {

Hsv rgb_to_hsv(double r, double g, double b) {
  for (double c : {r, g, b})
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("rgb_to_hsv: channel outside [0,1]");
  Hsv out;
  simd::detail::hsv_from_rgb(r, g, b, out.h, out.s, out.v);
  return out;
}

std::array<double, 3> point_color_features(const Point& point) {
  const Hsv c = rgb_to_hsv(point.rgb[0], point.rgb[1], point.rgb[2]);
  return {c.h, c.s, c.v};
}

ColorField::ColorField(const PointCloud& cloud) {
  if (!cloud.has_color()) throw std::invalid_argument("color features need a colored cloud");
  index_ = KdTree(cloud);
  const std::size_t n = cloud.size();
  std::vector<float> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = cloud[i].rgb[0];
    g[i] = cloud[i].rgb[1];
    b[i] = cloud[i].rgb[2];
  }
  h_.resize(n);
  s_.resize(n);
  v_.resize(n);
  simd::active_kernels().rgb_to_hsv(r.data(), g.data(), b.data(), n, h_.data(), s_.data(), v_.data());
}

std::array<double, 3> neighborhood_color_features(const Vec3& query, const ColorField& field, double r) {
  if (!(r > 0)) throw std::invalid_argument("color radius must be positive");
  thread_local std::vector<std::pair<PointId, double>> hits;
  hits.clear();
  field.index().radius_query(query, r, hits);
  if (hits.empty()) throw std::invalid_argument("neighborhood color query found no points");
  double h = 0, s = 0, v = 0;
  for (const auto& [id, d2] : hits) {
    const Hsv c = field.hsv(id);
    h += c.h;
    s += c.s;
    v += c.v;
  }
  const double n = static_cast<double>(hits.size());
  return {h / n, s / n, v / n};
}

void color_feature_block(const Point& point, const ColorField* field, std::span<const double> radii,
                         std::span<double> out) {
  if (out.size() != 3 + 3 * radii.size()) throw std::invalid_argument("color_feature_block: wrong output length");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] > 0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw std::invalid_argument("color radii must be positive and ascending");
  if (!radii.empty() && field == nullptr) throw std::invalid_argument("neighborhood colors need a color field");

  const auto own = point_color_features(point);
  std::copy(own.begin(), own.end(), out.begin());
  if (radii.empty()) return;

  // One query at the largest radius, bucketed into the smaller balls.
  thread_local std::vector<std::pair<PointId, double>> hits;
  hits.clear();
  field->index().radius_query(point.pos, radii.back(), hits);
  std::array<double, 8> r2{};
  std::vector<double> r2_large;
  double* limits = r2.data();
  if (radii.size() > r2.size()) {
    r2_large.resize(radii.size());
    limits = r2_large.data();
  }
  for (std::size_t j = 0; j < radii.size(); ++j) limits[j] = radii[j] * radii[j];

  for (std::size_t j = 0; j < radii.size(); ++j) {
    double h = 0, s = 0, v = 0;
    std::size_t n = 0;
    for (const auto& [id, d2] : hits) {
      if (d2 > limits[j]) continue;
      const Hsv c = field->hsv(id);
      h += c.h;
      s += c.s;
      v += c.v;
      ++n;
    }
    double* dst = out.data() + 3 + 3 * j;
    if (n == 0) {
      // Query position is not a cloud member and nothing is in range.
      std::copy(own.begin(), own.end(), dst);
    } else {
      const double count = static_cast<double>(n);
      dst[0] = h / count;
      dst[1] = s / count;
      dst[2] = v / count;
    }
  }
}

std::vector<double> color_feature_block(const Point& point, const ColorField* field, std::span<const double> radii) {
  std::vector<double> out(3 + 3 * radii.size());
  color_feature_block(point, field, radii, out);
  return out;
}

std::string radius_tag(double r) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), r);
  return std::string(buf, p);
}

std::vector<std::string> color_column_names(bool point_color, std::span<const double> radii) {
  std::vector<std::string> out;
  if (point_color) out = {"h", "s", "v"};
  for (double r : radii) {
    const std::string tag = "@r" + radius_tag(r);
    out.push_back("h" + tag);
    out.push_back("s" + tag);
    out.push_back("v" + tag);
  }
  return out;
}

}  // namespace terraclass
