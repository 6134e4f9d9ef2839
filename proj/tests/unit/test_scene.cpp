#include <gtest/gtest.h>

#include "terraclass/scene.hpp"

using namespace terraclass;

namespace {

SceneRecipe plane_recipe(double density) {
  Primitive p;
  p.kind = PrimitiveKind::plane;
  p.label = cls::ground;
  p.size = {10, 10, 0};
  p.density = density;
  return {{p}};
}

}  // namespace

TEST(Scene, PlaneYieldsExactCount) {
  const PointCloud c = synth_scene(plane_recipe(100), 1);
  EXPECT_EQ(c.size(), 10000u);
  EXPECT_TRUE(c.has_color());
  EXPECT_TRUE(c.has_labels());
  for (const auto& p : c.points()) {
    EXPECT_EQ(p.label, cls::ground);
    EXPECT_GE(p.pos.x, 0.0);
    EXPECT_LE(p.pos.x, 10.0);
  }
}

TEST(Scene, DeterministicPerSeed) {
  const SceneRecipe r = preset_recipe("demo", 4);
  const PointCloud a = synth_scene(r, 4);
  const PointCloud b = synth_scene(r, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].pos, b[i].pos);
    EXPECT_EQ(a[i].rgb, b[i].rgb);
    EXPECT_EQ(a[i].label, b[i].label);
  }
  const PointCloud c = synth_scene(r, 5);
  EXPECT_FALSE(c.size() == a.size() && c[0].pos == a[0].pos);
}

TEST(Scene, FlatRoofHeight) {
  Primitive box;
  box.kind = PrimitiveKind::box;
  box.label = cls::building;
  box.origin = {0, 0, 0};
  box.size = {8, 6, 5};
  box.density = 50;
  box.noise = 0.01;
  const PointCloud c = synth_scene({{box}}, 2);
  ASSERT_GT(c.size(), 0u);
  std::size_t roof = 0;
  for (const auto& p : c.points()) {
    EXPECT_EQ(p.label, cls::building);
    EXPECT_LE(p.pos.z, 5.0 + 0.1);
    if (std::abs(p.pos.x) < 3.5 && std::abs(p.pos.y) < 2.5) {
      EXPECT_NEAR(p.pos.z, 5.0, 0.1);
      ++roof;
    }
  }
  EXPECT_GT(roof, 1000u);
}

TEST(Scene, RejectsNonPositiveDensity) {
  EXPECT_THROW(synth_scene(plane_recipe(0), 1), std::invalid_argument);
}

TEST(Scene, PresetsCoverAllClasses) {
  for (const auto& name : preset_names()) {
    const PointCloud c = synth_scene(preset_recipe(name, 9), 9);
    const auto counts = class_counts(c);
    for (std::size_t k = 0; k < kNumClasses; ++k) EXPECT_GT(counts[k], 0u) << name << " class " << k;
    c.validate();
  }
  EXPECT_THROW(preset_recipe("nowhere", 1), std::invalid_argument);
}

TEST(Scene, RecipeJsonRoundTrip) {
  const SceneRecipe r = preset_recipe("demo", 3);
  const SceneRecipe back = parse_recipe(recipe_to_json(r), 3);
  const PointCloud a = synth_scene(r, 3);
  const PointCloud b = synth_scene(back, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); i += 97) EXPECT_EQ(a[i].pos, b[i].pos);
  const SceneRecipe viapreset = parse_recipe(R"({"preset": "demo"})", 3);
  EXPECT_EQ(synth_scene(viapreset, 3).size(), a.size());
}
