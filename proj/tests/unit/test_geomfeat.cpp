#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "terraclass/geomfeat.hpp"
#include "test_util.hpp"

using namespace terraclass;

namespace {

Mat3 diag(double a, double b, double c) {
  Mat3 m;
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

}  // namespace

TEST(Covariance, CollinearTriple) {
  const std::vector<Vec3> s = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  const Covariance c = covariance_tensor(s);
  EXPECT_EQ(c.medoid, (Vec3{1, 0, 0}));
  EXPECT_EQ(c.medoid_index, 1u);
  EXPECT_NEAR(c.matrix(0, 0), 2.0 / 3.0, 1e-15);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k)
      if (r || k) {
        EXPECT_EQ(c.matrix(r, k), 0.0);
      }
}

TEST(Covariance, SinglePointAndEmpty) {
  const std::vector<Vec3> s = {{3, 4, 5}};
  const Covariance c = covariance_tensor(s);
  EXPECT_EQ(c.medoid, s[0]);
  for (double v : c.matrix.m) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(covariance_tensor(std::vector<Vec3>{}), std::invalid_argument);
}

TEST(Covariance, MatchesDirectSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> s(10);
    for (auto& p : s) p = {u(rng), u(rng), u(rng)};
    const Covariance got = covariance_tensor(s);
    const auto want = oracle::direct_covariance(s);
    EXPECT_EQ(got.medoid_index, want.medoid);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(got.matrix(r, k), want.c[r][k], 1e-12);
  }
}

TEST(Eig3, Identity) {
  const auto e = eig3(diag(1, 1, 1));
  for (double v : e.values) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Eig3, Diagonal) {
  const auto e = eig3(diag(1, 2, 0));
  EXPECT_NEAR(e.values[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(e.values[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(e.values[2], 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors[0].y), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors[1].x), 1.0, 1e-15);
}

TEST(Eig3, MatchesCharacteristicRoots) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    double a[3][3];
    for (auto& row : a)
      for (double& v : row) v = n(rng);
    Mat3 c;
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) c(r, k) += a[r][j] * a[k][j];
    const auto e = eig3(c);
    const auto want = oracle::cubic_eigenvalues(c);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(e.raw[i], want[i], 1e-8);
    double sum = 0;
    for (double v : e.values) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    // C v = raw * v for every pair.
    for (int i = 0; i < 3; ++i) {
      const Vec3 v = e.vectors[i];
      const Vec3 cv{c(0, 0) * v.x + c(0, 1) * v.y + c(0, 2) * v.z, c(1, 0) * v.x + c(1, 1) * v.y + c(1, 2) * v.z,
                    c(2, 0) * v.x + c(2, 1) * v.y + c(2, 2) * v.z};
      EXPECT_NEAR(norm(cv - v * e.raw[i]), 0.0, 1e-9);
      EXPECT_NEAR(norm(v), 1.0, 1e-12);
    }
  }
}

TEST(Eig3, RejectsAsymmetricAndFlagsDegenerate) {
  Mat3 c = diag(1, 1, 1);
  c(0, 1) = 0.5;
  EXPECT_THROW(eig3(c), std::invalid_argument);
  const auto z = eig3(Mat3{});
  EXPECT_TRUE(z.degenerate);
  for (double v : z.values) EXPECT_EQ(v, 0.0);
}

TEST(GeomFeatures, PlanarNeighborhood) {
  std::vector<Vec3> s;
  for (int i = 0; i < 10; ++i) s.push_back({double(i % 4), double(i / 4) * 0.5, 0.0});
  const auto f = neighborhood_features(s, 0.0);
  const auto e = eig3(covariance_tensor(s).matrix);
  EXPECT_NEAR(f.surface_variation, 0.0, 1e-12);
  EXPECT_NEAR(f.scatter, 0.0, 1e-12);
  EXPECT_NEAR(f.verticality, 0.0, 1e-12);
  EXPECT_NEAR(f.planarity, e.values[1] / e.values[0], 1e-12);
  EXPECT_EQ(f.vertical_range, 0.0);
  EXPECT_NEAR(f.omnivariance, 0.0, 1e-6);
}

TEST(GeomFeatures, CollinearNeighborhood) {
  std::vector<Vec3> s;
  for (int i = 0; i < 10; ++i) s.push_back({double(i), 0.0, 0.0});
  const auto f = neighborhood_features(s, 0.0);
  EXPECT_NEAR(f.linearity, 1.0, 1e-12);
  EXPECT_NEAR(f.planarity, 0.0, 1e-12);
  EXPECT_NEAR(f.omnivariance, 0.0, 1e-12);
  EXPECT_NEAR(f.eigenentropy, 0.0, 1e-12);
  EXPECT_NEAR(f.anisotropy, 1.0, 1e-12);
}

TEST(GeomFeatures, HeightColumns) {
  const std::vector<Vec3> s = {{0, 0, 2}, {1, 0, 5}, {0, 1, 3}, {1, 1, 4}};
  const auto f = neighborhood_features(s, 3.0);
  EXPECT_EQ(f.vertical_range, 3.0);
  EXPECT_EQ(f.height_below, 1.0);
  EXPECT_EQ(f.height_above, 2.0);
}

TEST(GeomFeatures, VerticalWall) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 3);
  std::vector<Vec3> s(10);
  for (auto& p : s) p = {0.0, u(rng), u(rng)};
  const auto f = neighborhood_features(s, 1.0);
  const auto e = eig3(covariance_tensor(s).matrix);
  EXPECT_NEAR(std::abs(e.vectors[2].x), 1.0, 1e-6);
  EXPECT_NEAR(f.verticality, 1.0, 1e-6);
}

TEST(GeomFeatures, IndependentOfNeighborOrder) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Vec3> s(10);
  for (auto& p : s) p = {u(rng), u(rng), u(rng)};
  const auto base = neighborhood_features(s, 0.5).as_array();
  for (int t = 0; t < 20; ++t) {
    std::shuffle(s.begin(), s.end(), rng);
    EXPECT_EQ(neighborhood_features(s, 0.5).as_array(), base);
  }
}

TEST(GeomFeatures, DegenerateNeighborhoodIsZeroShape) {
  const std::vector<Vec3> s(5, Vec3{1, 2, 3});
  const auto f = neighborhood_features(s, 2.0);
  EXPECT_EQ(f.planarity, 0.0);
  EXPECT_EQ(f.eigenentropy, 0.0);
  EXPECT_EQ(f.height_above, 1.0);
  for (double v : f.as_array()) EXPECT_TRUE(std::isfinite(v));
}

TEST(GeomFeatures, MultiscaleLayout) {
  const PointCloud c = testutil::random_cloud(3000, 2, 20.0);
  const ScalePyramid pyr(c, 0.204);
  const auto v = features_multiscale(c[0].pos, pyr);
  EXPECT_EQ(v.size(), 135u);
  EXPECT_EQ(geom_column_names(9).size(), 135u);
  EXPECT_EQ(geom_column_names(9)[15], std::string(geom_feature_names()[0]) + "@s1");
  for (double x : v) EXPECT_TRUE(std::isfinite(x));

  const ScalePyramid one(c, 0.204, 1);
  const auto single = features_single_scale(c[5].pos, one[0]).as_array();
  const auto multi = features_multiscale(c[5].pos, one);
  EXPECT_TRUE(std::equal(single.begin(), single.end(), multi.begin()));
}
