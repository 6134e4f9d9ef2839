#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "terraclass/spatial.hpp"

using namespace terraclass;

namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed, double extent) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, extent);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

}  // namespace

TEST(KdTree, LineLattice) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({double(i), 0, 0});
  const KdTree tree(pts);
  const auto nn = tree.knn({3.2, 0, 0}, 3);
  ASSERT_EQ(nn.size(), 3u);
  EXPECT_EQ(nn[0].id, 3u);
  EXPECT_EQ(nn[1].id, 4u);
  EXPECT_EQ(nn[2].id, 2u);
  EXPECT_NEAR(nn[0].distance, 0.2, 1e-12);
  EXPECT_NEAR(nn[1].distance, 0.8, 1e-12);
  EXPECT_NEAR(nn[2].distance, 1.2, 1e-12);
  const auto edge = tree.knn({0, 0, 0}, 3);
  EXPECT_EQ(edge[0].id, 0u);
  EXPECT_EQ(edge[1].id, 1u);
  EXPECT_EQ(edge[2].id, 2u);
  EXPECT_EQ(tree.radius_search({0.5, 0, 0}, 0.25).size(), 0u);
}

TEST(KdTree, KLargerThanCloud) {
  const std::vector<Vec3> pts = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const KdTree tree(pts);
  EXPECT_EQ(tree.knn({0, 0, 0}, 10).size(), 3u);
  const KdTree one(std::vector<Vec3>{{5, 5, 5}});
  const auto nn = one.knn({0, 0, 0}, 4);
  ASSERT_EQ(nn.size(), 1u);
  EXPECT_EQ(nn[0].id, 0u);
  EXPECT_EQ(one.radius_search({5, 5, 5}, 0.0).size(), 1u);
}

TEST(KdTree, TiesBreakBySmallerId) {
  const std::vector<Vec3> pts = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}};
  const KdTree tree(pts);
  const auto nn = tree.knn({0, 0, 0}, 3);
  EXPECT_EQ(nn[0].id, 0u);
  EXPECT_EQ(nn[1].id, 1u);
  EXPECT_EQ(nn[2].id, 2u);
}

TEST(KdTree, MatchesBruteForce) {
  const auto pts = random_points(5000, 7, 20.0);
  const KdTree tree(pts);
  const auto queries = random_points(100, 8, 20.0);
  for (const auto& q : queries) {
    const auto got = tree.knn(q, 10);
    const auto want = oracle::brute_knn(pts, q, 10);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id);
      EXPECT_EQ(got[i].distance, want[i].distance);
    }
    auto ids = tree.radius_search(q, 1.5);
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, oracle::brute_radius(pts, q, 1.5));
  }
}

TEST(KdTree, ClosedBallOnLattice) {
  std::vector<Vec3> pts;
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) pts.push_back({double(x), double(y), double(z)});
  const KdTree tree(pts);
  EXPECT_EQ(tree.radius_search({0, 0, 0}, 1.0).size(), 7u);
}

TEST(KdTree, LeavesRespectCapacityAndCoverAllPoints) {
  const auto pts = random_points(100000, 3, 100.0);
  const KdTree tree(pts);
  std::size_t covered = 0;
  for (const auto& n : tree.nodes()) {
    if (n.axis >= 0) continue;
    EXPECT_LE(n.end - n.begin, KdTree::kLeafCapacity);
    covered += n.end - n.begin;
  }
  EXPECT_EQ(covered, pts.size());
  std::vector<PointId> ids(tree.leaf_order_ids().begin(), tree.leaf_order_ids().end());
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(ids[i], i);
}

TEST(KdTree, DuplicatePointsStayExact) {
  std::vector<Vec3> pts(200, Vec3{1, 1, 1});
  pts.push_back({2, 2, 2});
  const KdTree tree(pts);
  const auto nn = tree.knn({1, 1, 1}, 5);
  for (std::size_t i = 0; i < nn.size(); ++i) EXPECT_EQ(nn[i].id, i);
  EXPECT_EQ(tree.radius_search({1, 1, 1}, 0.0).size(), 200u);
}
