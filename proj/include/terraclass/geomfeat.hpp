#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "terraclass/pyramid.hpp"
#include "terraclass/types.hpp"

namespace terraclass {

inline constexpr std::size_t kDefaultNeighbors = 10;

/// Row-major symmetric 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};
  double& operator()(int r, int c) { return m[static_cast<std::size_t>(r * 3 + c)]; }
  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
};

struct Covariance {
  Mat3 matrix;
  Vec3 medoid;
  std::size_t medoid_index = 0;  // position of the medoid in the input span
};

/// C = (1/k) sum (p_i - m)(p_i - m)^T about the medoid m, the member with the
/// smallest summed Euclidean distance to all members (ties: earliest in the
/// span). Throws std::invalid_argument for an empty set.
Covariance covariance_tensor(std::span<const Vec3> neighborhood);

struct EigenDecomp3 {
  /// Eigenvalues as computed, descending, before clamping/normalization.
  std::array<double, 3> raw{};
  /// Clamped at 0 and normalized to unit sum; all zero when degenerate.
  std::array<double, 3> values{};
  /// Unit eigenvectors matching `values`; canonical axes when degenerate.
  std::array<Vec3, 3> vectors{};
  bool degenerate = false;
};

/// Symmetric 3x3 eigendecomposition (cyclic Jacobi). The matrix is
/// degenerate when its trace is <= 1e-15. Throws std::invalid_argument for
/// an asymmetric input.
EigenDecomp3 eig3(const Mat3& c);

inline constexpr std::size_t kGeomFeatureCount = 15;

/// Per-point local shape descriptors of one neighborhood.
struct GeomFeatures {
  double omnivariance = 0;
  double eigenentropy = 0;
  double anisotropy = 0;
  double planarity = 0;
  double linearity = 0;
  double surface_variation = 0;
  double scatter = 0;
  double verticality = 0;
  // First-order moments are absolute values so that the arbitrary eigenvector
  // sign cannot flip them.
  double moment1_e1 = 0;
  double moment1_e2 = 0;
  double moment2_e1 = 0;
  double moment2_e2 = 0;
  double vertical_range = 0;
  double height_below = 0;
  double height_above = 0;

  std::array<double, kGeomFeatureCount> as_array() const;
};

const std::array<std::string_view, kGeomFeatureCount>& geom_feature_names();

/// "<feature>@s<level>" for every level, level-major.
std::vector<std::string> geom_column_names(std::size_t n_levels);

/// Features of an explicit neighborhood. The neighborhood is treated as a
/// set: it is put into a canonical (lexicographic) order before any
/// floating-point accumulation. Heights are relative to `query_z`.
GeomFeatures neighborhood_features(std::span<const Vec3> neighborhood, double query_z);

/// Features of `query` from its k nearest neighbors in one pyramid level.
GeomFeatures features_single_scale(const Vec3& query, const PyramidLevel& level,
                                   std::size_t k = kDefaultNeighbors);

/// Writes 15 * pyramid.size() values, level-major, into `out`.
void features_multiscale(const Vec3& query, const ScalePyramid& pyramid, std::size_t k, std::span<double> out);
std::vector<double> features_multiscale(const Vec3& query, const ScalePyramid& pyramid,
                                        std::size_t k = kDefaultNeighbors);

}  // namespace terraclass
