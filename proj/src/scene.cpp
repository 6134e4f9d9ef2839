#include "terraclass/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "terraclass/error.hpp"

namespace terraclass {
namespace {

using json = nlohmann::json;
constexpr double kPi = std::numbers::pi;

// 2D region covered by a primitive, used to carve ground planes.
struct Footprint {
  enum class Shape { rect, ellipse } shape = Shape::rect;
  double cx = 0, cy = 0;
  double hx = 0, hy = 0;  // half extents (rect) or radii (ellipse)
  double cos_yaw = 1, sin_yaw = 0;
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool contains(double x, double y) const {
    const double dx = x - cx, dy = y - cy;
    const double u = dx * cos_yaw + dy * sin_yaw;
    const double v = -dx * sin_yaw + dy * cos_yaw;
    if (shape == Shape::rect) return std::abs(u) <= hx && std::abs(v) <= hy;
    return (u * u) / (hx * hx) + (v * v) / (hy * hy) <= 1.0;
  }
};

Footprint footprint_of(const Primitive& p) {
  Footprint f;
  switch (p.kind) {
    case PrimitiveKind::plane:
      f.cx = p.origin.x + p.size.x / 2;
      f.cy = p.origin.y + p.size.y / 2;
      f.hx = p.size.x / 2;
      f.hy = p.size.y / 2;
      break;
    case PrimitiveKind::box:
      f.cx = p.origin.x;
      f.cy = p.origin.y;
      f.hx = p.size.x / 2;
      f.hy = p.size.y / 2;
      f.cos_yaw = std::cos(p.yaw);
      f.sin_yaw = std::sin(p.yaw);
      break;
    case PrimitiveKind::ellipsoid:
      f.shape = Footprint::Shape::ellipse;
      f.cx = p.origin.x;
      f.cy = p.origin.y;
      f.hx = p.size.x;
      f.hy = p.size.y;
      break;
    case PrimitiveKind::cylinder:
      f.shape = Footprint::Shape::ellipse;
      f.cx = p.origin.x;
      f.cy = p.origin.y;
      f.hx = f.hy = p.size.x;
      break;
  }
  const double r = std::hypot(f.hx, f.hy);
  f.min_x = f.cx - r;
  f.max_x = f.cx + r;
  f.min_y = f.cy - r;
  f.max_y = f.cy + r;
  return f;
}

// Uniform bucket grid over footprints.
class FootprintGrid {
 public:
  FootprintGrid(std::vector<Footprint> fps, double cell) : fps_(std::move(fps)), cell_(cell) {
    if (fps_.empty()) return;
    min_x_ = fps_[0].min_x;
    min_y_ = fps_[0].min_y;
    double max_x = fps_[0].max_x, max_y = fps_[0].max_y;
    for (const auto& f : fps_) {
      min_x_ = std::min(min_x_, f.min_x);
      min_y_ = std::min(min_y_, f.min_y);
      max_x = std::max(max_x, f.max_x);
      max_y = std::max(max_y, f.max_y);
    }
    nx_ = static_cast<long>((max_x - min_x_) / cell_) + 1;
    ny_ = static_cast<long>((max_y - min_y_) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_ * ny_));
    for (std::size_t i = 0; i < fps_.size(); ++i) {
      const auto& f = fps_[i];
      for (long gx = cell_x(f.min_x); gx <= cell_x(f.max_x); ++gx)
        for (long gy = cell_y(f.min_y); gy <= cell_y(f.max_y); ++gy)
          buckets_[static_cast<std::size_t>(gx * ny_ + gy)].push_back(i);
    }
  }

  bool covered(double x, double y) const {
    if (fps_.empty()) return false;
    const long gx = static_cast<long>(std::floor((x - min_x_) / cell_));
    const long gy = static_cast<long>(std::floor((y - min_y_) / cell_));
    if (gx < 0 || gy < 0 || gx >= nx_ || gy >= ny_) return false;
    for (std::size_t i : buckets_[static_cast<std::size_t>(gx * ny_ + gy)])
      if (fps_[i].contains(x, y)) return true;
    return false;
  }

 private:
  long cell_x(double x) const { return std::clamp<long>(static_cast<long>((x - min_x_) / cell_), 0, nx_ - 1); }
  long cell_y(double y) const { return std::clamp<long>(static_cast<long>((y - min_y_) / cell_), 0, ny_ - 1); }

  std::vector<Footprint> fps_;
  double cell_;
  double min_x_ = 0, min_y_ = 0;
  long nx_ = 0, ny_ = 0;
  std::vector<std::vector<std::size_t>> buckets_;
};

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sigma) { return sigma > 0 ? std::normal_distribution<double>(0.0, sigma)(rng_) : 0.0; }

  std::array<float, 3> color(const ColorDistribution& c) {
    std::array<float, 3> out;
    for (int i = 0; i < 3; ++i) {
      const double v = std::clamp(c.mean[i] + normal(c.sigma), 0.0, 1.0);
      out[i] = static_cast<float>(std::round(v * 255.0) / 255.0);
    }
    return out;
  }

  Point point(const Primitive& p, Vec3 pos) {
    Point out;
    out.pos = {pos.x + normal(p.noise), pos.y + normal(p.noise), pos.z + normal(p.noise)};
    out.rgb = color(p.color);
    out.label = p.label;
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

std::size_t sample_count(double area, double density) {
  return static_cast<std::size_t>(std::llround(area * density));
}

void check_primitive(const Primitive& p, std::size_t index) {
  const std::string where = "primitive " + std::to_string(index) + ": ";
  if (!(p.density > 0)) throw std::invalid_argument(where + "density must be positive");
  if (!(p.noise >= 0)) throw std::invalid_argument(where + "noise must be non-negative");
  if (p.label >= kNumClasses) throw std::invalid_argument(where + "label must be a class id");
  switch (p.kind) {
    case PrimitiveKind::plane:
      if (!(p.size.x > 0 && p.size.y > 0)) throw std::invalid_argument(where + "plane size must be positive");
      break;
    case PrimitiveKind::box:
    case PrimitiveKind::ellipsoid:
      if (!(p.size.x > 0 && p.size.y > 0 && p.size.z > 0))
        throw std::invalid_argument(where + "size must be positive");
      break;
    case PrimitiveKind::cylinder:
      if (!(p.size.x > 0 && p.size.z > 0)) throw std::invalid_argument(where + "cylinder radius/height must be positive");
      break;
  }
}

void sample_plane(const Primitive& p, Sampler& s, const FootprintGrid* carve, std::vector<Point>& out) {
  const std::size_t n = sample_count(p.size.x * p.size.y, p.density);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = s.uniform(0.0, p.size.x);
    const double dy = s.uniform(0.0, p.size.y);
    const Vec3 pos{p.origin.x + dx, p.origin.y + dy, p.origin.z + p.slope[0] * dx + p.slope[1] * dy};
    Point pt = s.point(p, pos);
    if (carve && carve->covered(pos.x, pos.y)) continue;
    out.push_back(pt);
  }
}

void sample_box(const Primitive& p, Sampler& s, std::vector<Point>& out) {
  const double lx = p.size.x, ly = p.size.y, h = p.size.z;
  const double c = std::cos(p.yaw), sn = std::sin(p.yaw);
  auto place = [&](double u, double v, double z) {
    return Vec3{p.origin.x + u * c - v * sn, p.origin.y + u * sn + v * c, p.origin.z + z};
  };
  const bool gabled = p.roof == RoofKind::gabled && p.ridge_height > 0;
  const double ridge = gabled ? p.ridge_height : 0.0;

  // Roof.
  const double roof_area = gabled ? lx * 2.0 * std::hypot(ly / 2, ridge) : lx * ly;
  const std::size_t n_roof = sample_count(roof_area, p.density);
  for (std::size_t i = 0; i < n_roof; ++i) {
    const double u = s.uniform(-lx / 2, lx / 2);
    const double v = s.uniform(-ly / 2, ly / 2);
    const double z = h + ridge * (1.0 - std::abs(v) / (ly / 2));
    out.push_back(s.point(p, place(u, v, z)));
  }

  // Walls: perimeter x height, excluding gable triangles.
  const double wall_density = p.density * p.side_density_scale;
  if (wall_density <= 0) return;
  const double perimeter = 2 * (lx + ly);
  const std::size_t n_wall = sample_count(perimeter * h, wall_density);
  for (std::size_t i = 0; i < n_wall; ++i) {
    double t = s.uniform(0.0, perimeter);
    const double z = s.uniform(0.0, h);
    double u, v;
    if (t < lx) {
      u = t - lx / 2, v = -ly / 2;
    } else if ((t -= lx) < ly) {
      u = lx / 2, v = t - ly / 2;
    } else if ((t -= ly) < lx) {
      u = lx / 2 - t, v = ly / 2;
    } else {
      t -= lx;
      u = -lx / 2, v = ly / 2 - t;
    }
    out.push_back(s.point(p, place(u, v, z)));
  }
}

void sample_ellipsoid(const Primitive& p, Sampler& s, std::vector<Point>& out) {
  const double a = p.size.x, b = p.size.y, cz = p.size.z;
  // Thomsen's approximation of the ellipsoid surface area.
  constexpr double k = 1.6075;
  const double area = 4 * kPi *
                      std::pow((std::pow(a * b, k) + std::pow(a * cz, k) + std::pow(b * cz, k)) / 3.0, 1.0 / k);
  const std::size_t n = sample_count(0.75 * area, p.density);
  std::size_t produced = 0;
  while (produced < n) {
    const double z = s.uniform(-1.0, 1.0);
    const double phi = s.uniform(0.0, 2 * kPi);
    if (z < -0.5) continue;
    const double r = std::sqrt(1 - z * z);
    // Foliage is a shell, not a hard surface.
    const double depth = s.uniform(0.75, 1.0);
    const Vec3 pos{p.origin.x + a * depth * r * std::cos(phi), p.origin.y + b * depth * r * std::sin(phi),
                   p.origin.z + cz * depth * z};
    out.push_back(s.point(p, pos));
    ++produced;
  }
}

void sample_cylinder(const Primitive& p, Sampler& s, std::vector<Point>& out) {
  const double r = p.size.x, h = p.size.z;
  const std::size_t n = std::max<std::size_t>(1, sample_count(2 * kPi * r * h, p.density));
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = s.uniform(0.0, 2 * kPi);
    const double z = s.uniform(0.0, h);
    out.push_back(s.point(p, {p.origin.x + r * std::cos(phi), p.origin.y + r * std::sin(phi), p.origin.z + z}));
  }
}

bool carves(const Primitive& p) { return p.kind == PrimitiveKind::plane && p.label == cls::ground && p.carve; }

}  // namespace

PointCloud synth_scene(const SceneRecipe& recipe, std::uint64_t seed) {
  if (recipe.primitives.empty()) throw std::invalid_argument("scene recipe has no primitives");
  for (std::size_t i = 0; i < recipe.primitives.size(); ++i) check_primitive(recipe.primitives[i], i);

  std::vector<Footprint> fps;
  for (const auto& p : recipe.primitives)
    if (!(p.kind == PrimitiveKind::plane && p.label == cls::ground)) fps.push_back(footprint_of(p));
  const FootprintGrid grid(std::move(fps), 5.0);

  Sampler sampler(seed);
  std::vector<Point> points;
  for (const auto& p : recipe.primitives) {
    switch (p.kind) {
      case PrimitiveKind::plane: sample_plane(p, sampler, carves(p) ? &grid : nullptr, points); break;
      case PrimitiveKind::box: sample_box(p, sampler, points); break;
      case PrimitiveKind::ellipsoid: sample_ellipsoid(p, sampler, points); break;
      case PrimitiveKind::cylinder: sample_cylinder(p, sampler, points); break;
    }
  }
  if (points.empty()) throw std::invalid_argument("scene recipe produced no points");
  return PointCloud(std::move(points), true, true);
}

// ---------------------------------------------------------------------------
// JSON recipes

namespace {

std::string_view kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::plane: return "plane";
    case PrimitiveKind::box: return "box";
    case PrimitiveKind::ellipsoid: return "ellipsoid";
    case PrimitiveKind::cylinder: return "cylinder";
  }
  return "?";
}

Vec3 vec_from(const json& j, std::size_t min_len) {
  if (!j.is_array() || j.size() < min_len || j.size() > 3) throw ParseError("expected an array of numbers");
  Vec3 v;
  v.x = j.at(0).get<double>();
  if (j.size() > 1) v.y = j.at(1).get<double>();
  if (j.size() > 2) v.z = j.at(2).get<double>();
  return v;
}

Primitive primitive_from(const json& j) {
  Primitive p;
  const auto type = j.at("type").get<std::string>();
  if (type == "plane") p.kind = PrimitiveKind::plane;
  else if (type == "box") p.kind = PrimitiveKind::box;
  else if (type == "ellipsoid") p.kind = PrimitiveKind::ellipsoid;
  else if (type == "cylinder") p.kind = PrimitiveKind::cylinder;
  else throw ParseError("unknown primitive type '" + type + "'");

  const auto label = j.at("label").get<std::string>();
  auto id = class_from_name(label);
  if (!id || *id == kUnlabeled) throw ParseError("unknown class label '" + label + "'");
  p.label = *id;

  p.origin = vec_from(j.at("origin"), 2);
  p.size = vec_from(j.at("size"), 1);
  p.density = j.at("density").get<double>();
  p.noise = j.value("noise", 0.0);
  p.yaw = j.value("yaw", 0.0);
  p.carve = j.value("carve", true);
  p.side_density_scale = j.value("side_density_scale", 1.0);
  if (j.contains("slope")) {
    const auto& s = j.at("slope");
    p.slope = {s.at(0).get<double>(), s.at(1).get<double>()};
  }
  if (j.contains("roof")) {
    const auto roof = j.at("roof").get<std::string>();
    if (roof == "flat") p.roof = RoofKind::flat;
    else if (roof == "gabled") p.roof = RoofKind::gabled;
    else throw ParseError("unknown roof '" + roof + "'");
  }
  p.ridge_height = j.value("ridge_height", 0.0);
  if (j.contains("color")) {
    const auto& c = j.at("color");
    const auto& m = c.at("mean");
    p.color.mean = {m.at(0).get<double>(), m.at(1).get<double>(), m.at(2).get<double>()};
    p.color.sigma = c.value("sigma", 0.0);
  }
  return p;
}

}  // namespace

SceneRecipe parse_recipe(std::string_view text, std::uint64_t seed) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("recipe: ") + e.what());
  }
  try {
    if (j.contains("preset"))
      return preset_recipe(j.at("preset").get<std::string>(), seed, j.value("extent", 60.0));
    SceneRecipe recipe;
    for (const auto& item : j.at("primitives")) recipe.primitives.push_back(primitive_from(item));
    return recipe;
  } catch (const json::exception& e) {
    throw ParseError(std::string("recipe: ") + e.what());
  }
}

SceneRecipe load_recipe(const std::filesystem::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open recipe '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_recipe(ss.str(), seed);
}

std::string recipe_to_json(const SceneRecipe& recipe) {
  json prims = json::array();
  for (const auto& p : recipe.primitives) {
    json j;
    j["type"] = kind_name(p.kind);
    j["label"] = class_name(p.label);
    j["origin"] = {p.origin.x, p.origin.y, p.origin.z};
    j["size"] = {p.size.x, p.size.y, p.size.z};
    j["density"] = p.density;
    j["noise"] = p.noise;
    j["color"] = {{"mean", p.color.mean}, {"sigma", p.color.sigma}};
    if (p.kind == PrimitiveKind::plane) {
      j["slope"] = p.slope;
      j["carve"] = p.carve;
    }
    if (p.kind == PrimitiveKind::box) {
      j["yaw"] = p.yaw;
      j["roof"] = p.roof == RoofKind::gabled ? "gabled" : "flat";
      j["ridge_height"] = p.ridge_height;
      j["side_density_scale"] = p.side_density_scale;
    }
    prims.push_back(std::move(j));
  }
  return json{{"primitives", prims}}.dump(2);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

struct Palette {
  static constexpr ColorDistribution grass{{0.34, 0.46, 0.20}, 0.05};
  static constexpr ColorDistribution cropland{{0.52, 0.42, 0.28}, 0.05};
  static constexpr ColorDistribution hillside{{0.40, 0.47, 0.24}, 0.06};
  static constexpr ColorDistribution asphalt{{0.36, 0.36, 0.37}, 0.03};
  static constexpr ColorDistribution gray_roof{{0.62, 0.62, 0.64}, 0.04};
  static constexpr ColorDistribution red_roof{{0.66, 0.27, 0.20}, 0.05};
  static constexpr ColorDistribution foliage{{0.16, 0.33, 0.10}, 0.05};
  static constexpr ColorDistribution pole{{0.80, 0.80, 0.78}, 0.04};
};

struct Circle {
  double x, y, r;
};

class LayoutBuilder {
 public:
  LayoutBuilder(std::uint64_t seed, double extent) : rng_(seed ^ 0x9e3779b97f4a7c15ULL), extent_(extent) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool coin(double p) { return uniform(0, 1) < p; }

  double extent() const { return extent_; }
  SceneRecipe& recipe() { return recipe_; }

  // Hillside band along +y starting at `hill_start` (fraction of extent).
  void set_hill(double start_fraction, double slope) {
    hill_start_ = start_fraction * extent_;
    hill_slope_ = slope;
  }
  double ground_z(double /*x*/, double y) const {
    return y > hill_start_ ? (y - hill_start_) * hill_slope_ : 0.0;
  }
  bool on_hill(double y) const { return y > hill_start_; }

  void ground(double density, bool cropland_band) {
    const double e = extent_;
    const double flat_depth = std::min(e, hill_start_);
    if (cropland_band) {
      const double split = 0.65 * e;
      add_plane(cls::ground, {0, 0, 0}, split, flat_depth, Palette::grass, density);
      add_plane(cls::ground, {split, 0, 0}, e - split, flat_depth, Palette::cropland, density);
    } else {
      add_plane(cls::ground, {0, 0, 0}, e, flat_depth, Palette::grass, density);
    }
    if (hill_start_ < e) {
      Primitive p = plane(cls::ground, {0, hill_start_, 0}, e, e - hill_start_, Palette::hillside, density);
      p.slope = {0.0, hill_slope_};
      recipe_.primitives.push_back(p);
    }
  }

  // Axis-aligned road strips; centerlines are kept for car and pole placement.
  void roads(int count_x, int count_y, double width, double density) {
    const double e = extent_;
    const double flat = std::min(e, hill_start_);
    for (int i = 0; i < count_x; ++i) {
      const double y = flat * (i + 1) / (count_x + 1) + uniform(-3, 3);
      add_plane(cls::road, {0, y - width / 2, 0.02}, e, width, Palette::asphalt, density);
      road_y_.push_back(y);
    }
    for (int i = 0; i < count_y; ++i) {
      const double x = e * (i + 1) / (count_y + 1) + uniform(-3, 3);
      add_plane(cls::road, {x - width / 2, 0, 0.02}, width, flat, Palette::asphalt, density);
      road_x_.push_back(x);
    }
    road_width_ = width;
  }

  bool near_road(double x, double y, double margin) const {
    for (double ry : road_y_)
      if (std::abs(y - ry) < road_width_ / 2 + margin) return true;
    for (double rx : road_x_)
      if (std::abs(x - rx) < road_width_ / 2 + margin && !on_hill(y)) return true;
    return false;
  }

  bool free(double x, double y, double r) const {
    for (const auto& c : occupied_)
      if (std::hypot(x - c.x, y - c.y) < r + c.r) return false;
    return true;
  }

  void buildings(int count, double red_fraction, double density, bool allow_hill) {
    int placed = 0;
    for (int attempt = 0; attempt < count * 60 && placed < count; ++attempt) {
      const double lx = uniform(8, 16), ly = uniform(7, 12);
      const double r = std::hypot(lx, ly) / 2;
      const double x = uniform(r, extent_ - r), y = uniform(r, extent_ - r);
      if (!allow_hill && on_hill(y + r)) continue;
      if (near_road(x, y, r + 1.0) || !free(x, y, r + 1.5)) continue;
      Primitive p;
      p.kind = PrimitiveKind::box;
      p.label = cls::building;
      p.origin = {x, y, ground_z(x, y - r)};
      p.size = {lx, ly, uniform(3.0, 9.0)};
      p.yaw = uniform(-0.25, 0.25);
      p.roof = coin(0.5) ? RoofKind::gabled : RoofKind::flat;
      p.ridge_height = p.roof == RoofKind::gabled ? uniform(1.5, 3.0) : 0.0;
      p.side_density_scale = 0.3;
      p.density = density;
      p.noise = 0.03;
      p.color = coin(red_fraction) ? Palette::red_roof : Palette::gray_roof;
      recipe_.primitives.push_back(p);
      occupied_.push_back({x, y, r});
      ++placed;
    }
  }

  void trees(int count, double density) {
    int placed = 0;
    for (int attempt = 0; attempt < count * 60 && placed < count; ++attempt) {
      const double rx = uniform(1.8, 3.8), ry = rx * uniform(0.8, 1.2), rz = uniform(2.0, 4.0);
      const double r = std::max(rx, ry);
      const double x = uniform(r, extent_ - r), y = uniform(r, extent_ - r);
      if (near_road(x, y, r) || !free(x, y, r + 0.5)) continue;
      Primitive p;
      p.kind = PrimitiveKind::ellipsoid;
      p.label = cls::high_vegetation;
      p.origin = {x, y, ground_z(x, y) + rz + uniform(2.0, 5.0)};
      p.size = {rx, ry, rz};
      p.density = density;
      p.noise = 0.08;
      p.color = Palette::foliage;
      recipe_.primitives.push_back(p);
      occupied_.push_back({x, y, r});
      ++placed;
    }
  }

  void cars(int count, double density) {
    static constexpr std::array<ColorDistribution, 5> kCarColors = {{
        {{0.75, 0.10, 0.10}, 0.04},
        {{0.12, 0.22, 0.62}, 0.04},
        {{0.92, 0.92, 0.90}, 0.03},
        {{0.08, 0.08, 0.09}, 0.02},
        {{0.85, 0.70, 0.12}, 0.04},
    }};
    if (road_y_.empty() && road_x_.empty()) return;
    const std::size_t n_roads = road_y_.size() + road_x_.size();
    for (int i = 0; i < count; ++i) {
      const std::size_t road = static_cast<std::size_t>(uniform(0, static_cast<double>(n_roads)));
      const double side = coin(0.5) ? 1.0 : -1.0;
      const double offset = side * road_width_ / 4;
      Primitive p;
      p.kind = PrimitiveKind::box;
      p.label = cls::car;
      const double along = uniform(3, extent_ - 3);
      if (road < road_y_.size()) {
        p.origin = {along, road_y_[road] + offset, 0.3};
        p.yaw = 0.0;
      } else {
        const double flat = std::min(extent_, hill_start_);
        p.origin = {road_x_[road - road_y_.size()] + offset, std::min(along, flat - 3), 0.3};
        p.yaw = kPi / 2;
      }
      p.size = {4.3, 1.8, 1.2};
      p.density = density;
      p.noise = 0.02;
      p.color = kCarColors[static_cast<std::size_t>(uniform(0, kCarColors.size())) % kCarColors.size()];
      recipe_.primitives.push_back(p);
    }
  }

  void street_furniture(int poles, int fences, double density) {
    if (road_y_.empty() && road_x_.empty()) return;
    for (int i = 0; i < poles; ++i) {
      Primitive p;
      p.kind = PrimitiveKind::cylinder;
      p.label = cls::human_made_object;
      const double side = coin(0.5) ? 1.0 : -1.0;
      if (!road_y_.empty() && (road_x_.empty() || coin(0.5))) {
        const double ry = road_y_[static_cast<std::size_t>(uniform(0, road_y_.size())) % road_y_.size()];
        p.origin = {uniform(1, extent_ - 1), ry + side * (road_width_ / 2 + 0.8), 0.0};
      } else {
        const double rx = road_x_[static_cast<std::size_t>(uniform(0, road_x_.size())) % road_x_.size()];
        p.origin = {rx + side * (road_width_ / 2 + 0.8), uniform(1, std::min(extent_, hill_start_) - 1), 0.0};
      }
      p.size = {0.15, 0.15, uniform(4.0, 8.0)};
      p.density = density * 3;
      p.noise = 0.02;
      p.color = Palette::pole;
      recipe_.primitives.push_back(p);
    }
    for (int i = 0; i < fences; ++i) {
      const double x = uniform(3, extent_ - 3), y = uniform(3, std::min(extent_, hill_start_) - 3);
      if (near_road(x, y, 1.0) || !free(x, y, 2.5)) continue;
      Primitive p;
      p.kind = PrimitiveKind::box;
      p.label = cls::human_made_object;
      p.origin = {x, y, 0.0};
      p.size = {uniform(3.0, 6.0), 0.25, uniform(0.9, 1.6)};
      p.yaw = uniform(0, kPi);
      p.density = density;
      p.noise = 0.02;
      p.color = {{0.72, 0.70, 0.66}, 0.05};
      recipe_.primitives.push_back(p);
      occupied_.push_back({x, y, 2.0});
    }
  }

 private:
  Primitive plane(Label label, Vec3 origin, double w, double d, ColorDistribution color, double density) {
    Primitive p;
    p.kind = PrimitiveKind::plane;
    p.label = label;
    p.origin = origin;
    p.size = {w, d, 0};
    p.density = density;
    p.noise = 0.02;
    p.color = color;
    return p;
  }
  void add_plane(Label label, Vec3 origin, double w, double d, ColorDistribution color, double density) {
    recipe_.primitives.push_back(plane(label, origin, w, d, color, density));
  }

  std::mt19937_64 rng_;
  double extent_;
  double hill_start_ = 1e300;
  double hill_slope_ = 0.0;
  double road_width_ = 7.0;
  std::vector<double> road_x_, road_y_;
  std::vector<Circle> occupied_;
  SceneRecipe recipe_;
};

}  // namespace

std::vector<std::string> preset_names() { return {"demo", "ankeny", "buildings", "cadastre"}; }

SceneRecipe preset_recipe(std::string_view name, std::uint64_t seed, double extent) {
  if (!(extent >= 40.0)) throw std::invalid_argument("preset extent must be at least 40 m");
  constexpr double kDensity = 20.0;
  LayoutBuilder b(seed, extent);
  const double area_scale = (extent * extent) / (60.0 * 60.0);
  auto scaled = [&](double n) { return std::max(1, static_cast<int>(std::lround(n * area_scale))); };

  if (name == "demo") {
    b.ground(kDensity, false);
    b.roads(1, 0, 6.0, kDensity);
    b.buildings(scaled(2), 0.5, kDensity, false);
    b.trees(scaled(3), kDensity);
    b.cars(scaled(3), kDensity);
    b.street_furniture(scaled(3), scaled(1), kDensity);
  } else if (name == "ankeny") {
    b.ground(kDensity, true);
    b.roads(1, 1, 7.0, kDensity);
    b.buildings(scaled(5), 0.0, kDensity, false);
    b.trees(scaled(8), kDensity);
    b.cars(scaled(8), kDensity);
    b.street_furniture(scaled(6), scaled(3), kDensity);
  } else if (name == "buildings") {
    b.ground(kDensity, false);
    b.roads(2, 1, 7.0, kDensity);
    b.buildings(scaled(10), 0.5, kDensity, false);
    b.trees(scaled(6), kDensity);
    b.cars(scaled(10), kDensity);
    b.street_furniture(scaled(8), scaled(4), kDensity);
  } else if (name == "cadastre") {
    b.set_hill(0.55, 0.35);
    b.ground(kDensity, false);
    b.roads(1, 1, 7.0, kDensity);
    b.buildings(scaled(6), 0.5, kDensity, true);
    b.trees(scaled(10), kDensity);
    b.cars(scaled(6), kDensity);
    b.street_furniture(scaled(5), scaled(3), kDensity);
  } else {
    throw std::invalid_argument("unknown scene preset '" + std::string(name) + "'");
  }
  return std::move(b.recipe());
}

}  // namespace terraclass
