#pragma once

#include <algorithm>

namespace terraclass::simd::detail {

inline void hsv_from_rgb(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max(r, std::max(g, b));
  const double mn = std::min(r, std::min(g, b));
  const double delta = mx - mn;
  v = mx;
  s = mx > 0.0 ? delta / mx : 0.0;
  if (delta == 0.0) {
    h = 0.0;
    return;
  }
  double sector;
  if (mx == r) {
    sector = (g - b) / delta;
    if (sector < 0.0) sector = sector + 6.0;
  } else if (mx == g) {
    sector = (b - r) / delta + 2.0;
  } else {
    sector = (r - g) / delta + 4.0;
  }
  h = sector / 6.0;
  if (h >= 1.0) h = 0.0;
}

}  // namespace terraclass::simd::detail
