#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "terraclass/cloud.hpp"

namespace testutil {

/// Fresh directory under the build tree for files written by one test.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::path(TERRACLASS_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Uniform random cloud in [0, extent)^3 with quantized colors and labels.
inline terraclass::PointCloud random_cloud(std::size_t n, std::uint64_t seed, double extent = 10.0,
                                           bool labeled = true) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, extent);
  std::uniform_int_distribution<int> c8(0, 255);
  std::uniform_int_distribution<int> lab(0, 5);
  terraclass::PointCloud cloud({}, true, labeled);
  for (std::size_t i = 0; i < n; ++i) {
    terraclass::Point p;
    p.pos = {u(rng), u(rng), u(rng)};
    p.rgb = {c8(rng) / 255.f, c8(rng) / 255.f, c8(rng) / 255.f};
    if (labeled) p.label = static_cast<terraclass::Label>(lab(rng));
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace testutil
