// Compiled with -mavx2 only; selected at runtime after a CPU check.
#include <immintrin.h>

#include "scalar_math.hpp"
#include "simd_variants.hpp"

namespace terraclass::simd::detail {

void squared_distances_avx2(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                            double qy, double qz, double* out) {
  const __m256d vqx = _mm256_set1_pd(qx);
  const __m256d vqy = _mm256_set1_pd(qy);
  const __m256d vqz = _mm256_set1_pd(qz);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vqx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vqy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vqz);
    __m256d acc = _mm256_mul_pd(dx, dx);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dy, dy));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double dz = zs[i] - qz;
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void rgb_to_hsv_avx2(const float* r, const float* g, const float* b, std::size_t n, double* h, double* s,
                     double* v) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d six = _mm256_set1_pd(6.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vr = _mm256_cvtps_pd(_mm_loadu_ps(r + i));
    const __m256d vg = _mm256_cvtps_pd(_mm_loadu_ps(g + i));
    const __m256d vb = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
    const __m256d mx = _mm256_max_pd(vr, _mm256_max_pd(vg, vb));
    const __m256d mn = _mm256_min_pd(vr, _mm256_min_pd(vg, vb));
    const __m256d delta = _mm256_sub_pd(mx, mn);

    const __m256d mx_pos = _mm256_cmp_pd(mx, zero, _CMP_GT_OQ);
    const __m256d sat = _mm256_and_pd(mx_pos, _mm256_div_pd(delta, _mm256_blendv_pd(one, mx, mx_pos)));

    const __m256d chroma = _mm256_cmp_pd(delta, zero, _CMP_NEQ_OQ);
    const __m256d safe_delta = _mm256_blendv_pd(one, delta, chroma);
    const __m256d is_r = _mm256_cmp_pd(mx, vr, _CMP_EQ_OQ);
    const __m256d is_g = _mm256_andnot_pd(is_r, _mm256_cmp_pd(mx, vg, _CMP_EQ_OQ));

    __m256d sec_r = _mm256_div_pd(_mm256_sub_pd(vg, vb), safe_delta);
    sec_r = _mm256_blendv_pd(sec_r, _mm256_add_pd(sec_r, six), _mm256_cmp_pd(sec_r, zero, _CMP_LT_OQ));
    const __m256d sec_g = _mm256_add_pd(_mm256_div_pd(_mm256_sub_pd(vb, vr), safe_delta), two);
    const __m256d sec_b = _mm256_add_pd(_mm256_div_pd(_mm256_sub_pd(vr, vg), safe_delta), four);
    __m256d sector = _mm256_blendv_pd(sec_b, sec_g, is_g);
    sector = _mm256_blendv_pd(sector, sec_r, is_r);

    __m256d hue = _mm256_div_pd(sector, six);
    hue = _mm256_andnot_pd(_mm256_cmp_pd(hue, one, _CMP_GE_OQ), hue);
    hue = _mm256_and_pd(chroma, hue);

    _mm256_storeu_pd(h + i, hue);
    _mm256_storeu_pd(s + i, sat);
    _mm256_storeu_pd(v + i, mx);
  }
  for (; i < n; ++i) hsv_from_rgb(r[i], g[i], b[i], h[i], s[i], v[i]);
}

}  // namespace terraclass::simd::detail
