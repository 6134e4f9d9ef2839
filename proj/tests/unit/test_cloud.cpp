#include <gtest/gtest.h>

#include "terraclass/cloud.hpp"
#include "terraclass/error.hpp"

using namespace terraclass;

TEST(Cloud, ClassIdsAndNames) {
  EXPECT_EQ(cls::ground, 0);
  EXPECT_EQ(cls::human_made_object, 5);
  EXPECT_EQ(class_name(cls::high_vegetation), "high_vegetation");
  EXPECT_EQ(class_name(kUnlabeled), "unlabeled");
  EXPECT_EQ(class_from_name("car"), cls::car);
  EXPECT_FALSE(class_from_name("tree").has_value());
  EXPECT_TRUE(is_valid_label(kUnlabeled));
  EXPECT_FALSE(is_valid_label(6));
}

TEST(Cloud, LegendPalette) {
  EXPECT_EQ(class_color(cls::ground), (Rgb8{0xFF, 0xF3, 0x91}));
  EXPECT_EQ(class_color(cls::high_vegetation), (Rgb8{0x4E, 0x9A, 0x06}));
  EXPECT_EQ(class_color(cls::building), (Rgb8{0xEF, 0x29, 0x29}));
  EXPECT_EQ(class_color(cls::road), (Rgb8{0x88, 0x8A, 0x85}));
  EXPECT_EQ(class_color(cls::car), (Rgb8{0xF5, 0x79, 0x00}));
  EXPECT_EQ(class_color(cls::human_made_object), (Rgb8{0x3F, 0xF3, 0xF6}));
}

TEST(Cloud, BoundsCountsAndSelect) {
  PointCloud c({}, false, true);
  c.push_back({{1, 2, 3}, {}, cls::road});
  c.push_back({{-1, 5, 0}, {}, cls::road});
  c.push_back({{0, 0, 9}, {}, kUnlabeled});
  const auto b = c.bounds();
  EXPECT_EQ(b.min, (Vec3{-1, 0, 0}));
  EXPECT_EQ(b.max, (Vec3{1, 5, 9}));
  const auto counts = class_counts(c);
  EXPECT_EQ(counts[cls::road], 2u);
  EXPECT_EQ(counts[kNumClasses], 1u);
  const PointCloud s = select(c, {2, 0});
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].pos, (Vec3{0, 0, 9}));
  EXPECT_TRUE(s.has_labels());
  EXPECT_THROW(PointCloud().bounds(), std::invalid_argument);
}

TEST(Cloud, ValidateRejectsBadPoints) {
  PointCloud c({}, true, true);
  c.push_back({{0, 0, NAN}, {0, 0, 0}, 0});
  EXPECT_THROW(c.validate(), Error);
  PointCloud d({}, true, true);
  d.push_back({{0, 0, 0}, {1.5f, 0, 0}, 0});
  EXPECT_THROW(d.validate(), Error);
  PointCloud e({}, true, true);
  e.push_back({{0, 0, 0}, {0, 0, 0}, 17});
  EXPECT_THROW(e.validate(), Error);
}
