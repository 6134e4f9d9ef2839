#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "terraclass/error.hpp"
#include "terraclass/evaluate.hpp"
#include "test_util.hpp"

using namespace terraclass;

namespace {

PointCloud labeled(std::vector<std::pair<Vec3, Label>> pts) {
  PointCloud c({}, false, true);
  for (auto& [p, l] : pts) c.push_back({p, {}, l});
  return c;
}

}  // namespace

TEST(SplitPlane, MirrorSymmetricClasses) {
  std::vector<std::pair<Vec3, Label>> pts;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(0.5, 4.5), y(0, 10);
  for (int i = 0; i < 200; ++i) {
    const double d = a(rng), yy = y(rng);
    const Label l = static_cast<Label>(i % 2);
    pts.push_back({{5 - d, yy, 0}, l});
    pts.push_back({{5 + d, yy, 0}, l});
  }
  const auto res = find_split_plane(labeled(pts), 36, 201);
  EXPECT_EQ(res.objective, 0.0);
  EXPECT_EQ(res.angle_index, 0u);
  EXPECT_NEAR(res.plane.offset, 5.0, 0.6);
}

TEST(SplitPlane, SingleClassSegmentSplitsAtMedian) {
  std::vector<std::pair<Vec3, Label>> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({{double(i), 0, 0}, cls::road});
  const auto res = find_split_plane(labeled(pts), 4, 200);
  EXPECT_EQ(res.objective, 0.0);
  EXPECT_NEAR(res.plane.offset, 49.5, 0.5);
}

TEST(SplitPlane, MatchesGridOracle) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 20);
    std::vector<std::pair<Vec3, Label>> pts;
    for (int i = 0; i < 300; ++i) {
      const Vec3 p{u(rng), u(rng), u(rng)};
      pts.push_back({p, static_cast<Label>(p.x + 0.3 * p.y < 12 ? 0 : 1)});
    }
    pts.push_back({{1, 1, 1}, kUnlabeled});
    const PointCloud c = labeled(pts);
    const auto got = find_split_plane(c, 8, 50);
    const auto want = oracle::grid_search(c, 8, 50);
    EXPECT_DOUBLE_EQ(got.objective, want.objective);
    EXPECT_DOUBLE_EQ(got.plane.theta, want.theta);
    EXPECT_DOUBLE_EQ(got.plane.offset, want.offset);
    EXPECT_DOUBLE_EQ(split_objective(c, got.plane), oracle::plane_objective(c, want.theta, want.offset));
    EXPECT_GE(got.objective, 0.0);
    EXPECT_LE(got.objective, 0.5);
    EXPECT_EQ(find_split_plane(c, 8, 50, 3).objective, got.objective);
  }
}

TEST(SplitPlane, TranslationInvariantPartition) {
  const PointCloud c = testutil::random_cloud(500, 6, 30.0);
  PointCloud moved({}, true, true);
  for (const auto& p : c.points()) moved.push_back({p.pos + Vec3{1000, -250, 7}, p.rgb, p.label});
  const auto a = find_split_plane(c, 12, 40);
  const auto b = find_split_plane(moved, 12, 40);
  EXPECT_EQ(a.angle_index, b.angle_index);
  EXPECT_EQ(a.offset_index, b.offset_index);
  EXPECT_NEAR(a.objective, b.objective, 1e-12);
}

TEST(SplitPlane, SplitIsDisjointCover) {
  const PointCloud c = testutil::random_cloud(400, 7, 10.0);
  const auto res = find_split_plane(c, 10, 20);
  const auto [pos, neg] = split_cloud(c, res.plane);
  EXPECT_EQ(pos.size() + neg.size(), c.size());
  for (const auto& p : pos.points()) EXPECT_TRUE(res.plane.positive(p.pos));
  for (const auto& p : neg.points()) EXPECT_FALSE(res.plane.positive(p.pos));
  EXPECT_THROW(find_split_plane(testutil::random_cloud(10, 1, 1.0, false)), std::invalid_argument);
}

TEST(BalancedSample, SaturatesAndWarns) {
  std::vector<std::pair<Vec3, Label>> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({{double(i), 0, 0}, cls::car});
  for (int i = 0; i < 50; ++i) pts.push_back({{double(i), 1, 0}, cls::ground});
  const PointCloud c = labeled(pts);
  const auto s = balanced_sample(c, 10000, 1);
  EXPECT_EQ(s.indices.size(), 55u);
  EXPECT_EQ(s.per_class[cls::car], 5u);
  EXPECT_FALSE(s.warnings.empty());
  const auto one = balanced_sample(c, 1, 1);
  EXPECT_EQ(one.indices.size(), 2u);
  EXPECT_EQ(one.per_class[cls::ground], 1u);
  EXPECT_TRUE(std::is_sorted(one.indices.begin(), one.indices.end()));
  EXPECT_EQ(balanced_sample(c, 3, 9).indices, balanced_sample(c, 3, 9).indices);
}

TEST(BalancedSample, UniformOverSeeds) {
  std::vector<std::pair<Vec3, Label>> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({{double(i), 0, 0}, cls::building});
  const PointCloud c = labeled(pts);
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) ++hits[balanced_sample(c, 1, seed).indices.at(0)];
  for (int h : hits) {
    EXPECT_GE(h, 70);
    EXPECT_LE(h, 130);
  }
}

TEST(Confusion, PerfectAndConstantPredictors) {
  std::vector<Label> truth;
  for (int i = 0; i < 60; ++i) truth.push_back(static_cast<Label>(i % 6));
  const auto perfect = confusion_matrix(truth, truth);
  EXPECT_EQ(perfect.overall_error(), 0.0);
  for (Label a = 0; a < 6; ++a)
    for (Label b = 0; b < 6; ++b) EXPECT_EQ(perfect.count(a, b), a == b ? 10u : 0u);
  const std::vector<Label> constant(60, cls::road);
  const auto cm = confusion_matrix(truth, constant);
  EXPECT_NEAR(cm.overall_error(), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(cm.class_error(cls::ground), 1.0 / 6.0, 1e-15);
  EXPECT_EQ(cm.class_error(cls::road), 0.0);
  EXPECT_THROW(confusion_matrix(truth, std::vector<Label>(3, 0)), std::invalid_argument);
}

TEST(Confusion, MatchesRecount) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> l(0, 5);
  std::vector<Label> t, p;
  for (int i = 0; i < 5000; ++i) t.push_back(static_cast<Label>(l(rng))), p.push_back(static_cast<Label>(l(rng)));
  const auto cm = confusion_matrix(t, p);
  std::uint64_t total = 0;
  for (Label a = 0; a < 6; ++a)
    for (Label b = 0; b < 6; ++b) {
      std::uint64_t n = 0;
      for (std::size_t i = 0; i < t.size(); ++i) n += t[i] == a && p[i] == b;
      EXPECT_EQ(cm.count(a, b), n);
      total += n;
      EXPECT_NEAR(cm.fraction(a, b), static_cast<double>(n) / 5000.0, 1e-15);
    }
  EXPECT_EQ(total, cm.total());
}

TEST(Report, FormatParseRoundTrip) {
  Report r;
  r.train_sets = {"ankeny", "buildings"};
  r.test_set = "cadastre";
  ConfusionMatrix::Counts counts{};
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) counts[a][b] = a * 7 + b * 3 + (a == b ? 500 : 0);
  r.rows.push_back({"g", "rf", 0.1234567890123, 12.5, ConfusionMatrix(counts)});
  r.rows.push_back({"g+cp+cn:0.4+cn:0.6+cn:0.9", "gbt", 1.0 / 3.0, 0.001, ConfusionMatrix()});
  const std::string text = format_report(r);
  EXPECT_EQ(parse_report(text), r);
  EXPECT_EQ(format_report(parse_report(text)), text);
  EXPECT_THROW(parse_report(text.substr(0, text.size() / 2)), ParseError);
  EXPECT_THROW(parse_report("hello\n"), ParseError);
}
