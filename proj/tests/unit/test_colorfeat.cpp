#include <gtest/gtest.h>

#include "oracles.hpp"
#include "terraclass/colorfeat.hpp"
#include "test_util.hpp"

using namespace terraclass;

TEST(Hsv, ReferenceColors) {
  EXPECT_EQ(rgb_to_hsv(1, 0, 0), (Hsv{0, 1, 1}));
  EXPECT_EQ(rgb_to_hsv(0.5, 0.5, 0.5), (Hsv{0, 0, 0.5}));
  const Hsv h = rgb_to_hsv(0, 0.5, 1);
  EXPECT_NEAR(h.h, 210.0 / 360.0, 1e-12);
  EXPECT_EQ(h.s, 1.0);
  EXPECT_EQ(h.v, 1.0);
  EXPECT_NEAR(rgb_to_hsv(0, 1, 0).h, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rgb_to_hsv(1, 0, 1).h, 5.0 / 6.0, 1e-15);
  EXPECT_THROW(rgb_to_hsv(1.2, 0, 0), std::invalid_argument);
}

TEST(ColorFeatures, CoincidentRedAndGreen) {
  PointCloud c({}, true, false);
  c.push_back({{0, 0, 0}, {1, 0, 0}, kUnlabeled});
  c.push_back({{0, 0, 0}, {0, 1, 0}, kUnlabeled});
  const ColorField field(c);
  const auto m = neighborhood_color_features({0, 0, 0}, field, 0.4);
  EXPECT_NEAR(m[0], 1.0 / 6.0, 1e-15);
  EXPECT_EQ(m[1], 1.0);
  EXPECT_EQ(m[2], 1.0);
}

TEST(ColorFeatures, IsolatedPointKeepsItsColor) {
  PointCloud c({}, true, false);
  c.push_back({{0, 0, 0}, {0.2f, 0.4f, 0.6f}, kUnlabeled});
  c.push_back({{5, 0, 0}, {1, 1, 1}, kUnlabeled});
  const ColorField field(c);
  const auto m = neighborhood_color_features(c[0].pos, field, 0.9);
  const Hsv h = rgb_to_hsv(0.2f, 0.4f, 0.6f);
  EXPECT_EQ(m, (std::array<double, 3>{h.h, h.s, h.v}));
}

TEST(ColorFeatures, MatchesBruteForceMean) {
  const PointCloud c = testutil::random_cloud(3000, 21, 5.0);
  const ColorField field(c);
  const auto pts = c.positions();
  for (std::size_t q = 0; q < 100; ++q) {
    const Vec3 query = c[q * 7].pos;
    const auto ids = oracle::brute_radius(pts, query, 0.6);
    double sh = 0, ss = 0, sv = 0;
    for (PointId id : ids) {
      const auto& p = c[id];
      const Hsv h = rgb_to_hsv(p.rgb[0], p.rgb[1], p.rgb[2]);
      sh += h.h, ss += h.s, sv += h.v;
    }
    const double n = static_cast<double>(ids.size());
    const auto m = neighborhood_color_features(query, field, 0.6);
    EXPECT_NEAR(m[0], sh / n, 1e-9);
    EXPECT_NEAR(m[1], ss / n, 1e-9);
    EXPECT_NEAR(m[2], sv / n, 1e-9);
  }
}

TEST(ColorFeatures, BlockLayout) {
  PointCloud c({}, true, false);
  for (int i = 0; i < 50; ++i) c.push_back({{i * 0.1, 0, 0}, {0.3f, 0.6f, 0.9f}, kUnlabeled});
  const ColorField field(c);
  EXPECT_EQ(color_feature_block(c[0], &field, {}).size(), 3u);
  const auto block = color_feature_block(c[10], &field, kDefaultColorRadii);
  ASSERT_EQ(block.size(), 12u);
  const Hsv h = rgb_to_hsv(0.3f, 0.6f, 0.9f);
  for (std::size_t i = 0; i < 12; i += 3) {
    EXPECT_NEAR(block[i], h.h, 1e-15);
    EXPECT_NEAR(block[i + 1], h.s, 1e-15);
    EXPECT_NEAR(block[i + 2], h.v, 1e-15);
  }
  const auto names = color_column_names(true, kDefaultColorRadii);
  ASSERT_EQ(names.size(), 12u);
  EXPECT_EQ(names[0], "h");
  EXPECT_EQ(names[3], "h@r0.4");
  EXPECT_EQ(names[11], "v@r0.9");
  EXPECT_EQ(radius_tag(1.0), "1");
}

TEST(ColorFeatures, ColorlessCloudRejected) {
  PointCloud c({}, false, false);
  c.push_back({{0, 0, 0}, {}, kUnlabeled});
  EXPECT_THROW(ColorField{c}, std::invalid_argument);
}
