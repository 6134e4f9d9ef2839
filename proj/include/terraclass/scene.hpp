#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "terraclass/cloud.hpp"

namespace terraclass {

enum class PrimitiveKind { plane, box, ellipsoid, cylinder };
enum class RoofKind { flat, gabled };

struct ColorDistribution {
  std::array<double, 3> mean{0.5, 0.5, 0.5};
  double sigma = 0.0;  // per-channel Gaussian spread
};

/// One sampled surface of a synthetic scene.
///
///  plane     origin = min corner, size = (width x, depth y, -), z follows `slope`
///  box       origin = footprint center at base height, size = (length, width, wall height),
///            rotated by `yaw`; roof flat or gabled (ridge along local x)
///  ellipsoid origin = center, size = radii; the bottom quarter is not sampled
///  cylinder  origin = base center, size = (radius, -, height); lateral surface only
///
/// `density` is points per square meter of sampled surface; planes use their
/// projected area so a w x h plane yields exactly round(w*h*density) samples
/// before ground carving.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::plane;
  Label label = cls::ground;
  Vec3 origin;
  Vec3 size;
  std::array<double, 2> slope{0.0, 0.0};
  double yaw = 0.0;
  RoofKind roof = RoofKind::flat;
  double ridge_height = 0.0;
  double side_density_scale = 1.0;  // box walls relative to roof density
  double density = 0.0;
  double noise = 0.0;  // isotropic Gaussian sigma in meters
  ColorDistribution color;
  /// Ground planes drop samples under the footprint of every other primitive.
  bool carve = true;
};

struct SceneRecipe {
  std::vector<Primitive> primitives;
};

/// Generates a labeled, colored cloud. Pure function of (recipe, seed).
/// Throws std::invalid_argument for a non-positive density or size.
PointCloud synth_scene(const SceneRecipe& recipe, std::uint64_t seed);

/// JSON recipe: {"primitives": [{"type": "plane", "label": "ground", ...}]}
/// or {"preset": "<name>", "extent": <meters>}.
SceneRecipe parse_recipe(std::string_view json, std::uint64_t seed);
SceneRecipe load_recipe(const std::filesystem::path& path, std::uint64_t seed);
std::string recipe_to_json(const SceneRecipe& recipe);

/// Built-in scene layouts modeled on the three reference survey types:
///   "ankeny"    flat ground with cropland, gray roofs, roads, trees, cars
///   "buildings" dense block of gray and red roofs, roads, trees, cars, street furniture
///   "cadastre"  like "buildings" plus sloped hillside ground
///   "demo"      a single small block
/// `extent` is the side length of the square scene in meters.
SceneRecipe preset_recipe(std::string_view name, std::uint64_t seed, double extent = 60.0);
std::vector<std::string> preset_names();

}  // namespace terraclass
