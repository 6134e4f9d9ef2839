#include "scalar_math.hpp"
#include "simd_variants.hpp"

namespace terraclass::simd::detail {

void squared_distances_scalar(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                              double qy, double qz, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void rgb_to_hsv_scalar(const float* r, const float* g, const float* b, std::size_t n, double* h, double* s,
                       double* v) {
  for (std::size_t i = 0; i < n; ++i) hsv_from_rgb(r[i], g[i], b[i], h[i], s[i], v[i]);
}

}  // namespace terraclass::simd::detail
