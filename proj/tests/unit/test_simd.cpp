#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "terraclass/simd/kernels.hpp"

using namespace terraclass::simd;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST(Simd, SquaredDistancesBitIdentical) {
  if (!isa_supported(Isa::avx2)) GTEST_SKIP() << "avx2 not available";
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 16u, 17u, 1001u}) {
    std::vector<double> xs(n), ys(n), zs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = u(rng), ys[i] = u(rng), zs[i] = u(rng);
    std::vector<double> a(n), b(n);
    const double qx = u(rng), qy = u(rng), qz = u(rng);
    kernels_for(Isa::scalar).squared_distances(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, a.data());
    kernels_for(Isa::avx2).squared_distances(xs.data(), ys.data(), zs.data(), n, qx, qy, qz, b.data());
    EXPECT_TRUE(same_bits(a, b)) << "n=" << n;
  }
}

TEST(Simd, RgbToHsvBitIdentical) {
  if (!isa_supported(Isa::avx2)) GTEST_SKIP() << "avx2 not available";
  std::vector<float> r, g, b;
  for (int i = 0; i < 256; i += 5)
    for (int j = 0; j < 256; j += 15)
      for (int k = 0; k < 256; k += 51) {
        r.push_back(i / 255.f);
        g.push_back(j / 255.f);
        b.push_back(k / 255.f);
      }
  // Achromatic and boundary entries.
  for (float x : {0.f, 1.f, 0.5f}) r.push_back(x), g.push_back(x), b.push_back(x);
  const std::size_t n = r.size();
  std::vector<double> h1(n), s1(n), v1(n), h2(n), s2(n), v2(n);
  kernels_for(Isa::scalar).rgb_to_hsv(r.data(), g.data(), b.data(), n, h1.data(), s1.data(), v1.data());
  kernels_for(Isa::avx2).rgb_to_hsv(r.data(), g.data(), b.data(), n, h2.data(), s2.data(), v2.data());
  EXPECT_TRUE(same_bits(h1, h2));
  EXPECT_TRUE(same_bits(s1, s2));
  EXPECT_TRUE(same_bits(v1, v2));
}

TEST(Simd, ActiveIsaCanBeForced) {
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  EXPECT_EQ(active_isa(), Isa::scalar);
  EXPECT_EQ(&active_kernels(), &kernels_for(Isa::scalar));
  set_active_isa(before);
}
