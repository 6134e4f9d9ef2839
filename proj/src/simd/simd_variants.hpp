#pragma once

#include <cstddef>

namespace terraclass::simd::detail {

void squared_distances_scalar(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                              double qy, double qz, double* out);
void rgb_to_hsv_scalar(const float* r, const float* g, const float* b, std::size_t n, double* h, double* s,
                       double* v);

#ifdef TERRACLASS_HAVE_AVX2
void squared_distances_avx2(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                            double qy, double qz, double* out);
void rgb_to_hsv_avx2(const float* r, const float* g, const float* b, std::size_t n, double* h, double* s,
                     double* v);
#endif

}  // namespace terraclass::simd::detail
