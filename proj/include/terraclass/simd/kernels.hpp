#pragma once

#include <cstddef>
#include <string_view>

namespace terraclass::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Whether this build contains the variant and the CPU can run it.
bool isa_supported(Isa isa);

/// Inner-loop kernels. Every variant must produce bit-identical output to the
/// scalar reference; the vector versions evaluate the same expressions in the
/// same order.
struct Kernels {
  /// out[i] = (xs[i]-qx)^2 + (ys[i]-qy)^2 + (zs[i]-qz)^2, summed left to right.
  void (*squared_distances)(const double* xs, const double* ys, const double* zs, std::size_t n, double qx,
                            double qy, double qz, double* out);

  /// Hexcone RGB -> HSV on structure-of-arrays input in [0,1]. Hue is scaled
  /// to [0,1) and set to 0 for achromatic colors.
  void (*rgb_to_hsv)(const float* r, const float* g, const float* b, std::size_t n, double* h, double* s,
                     double* v);
};

const Kernels& kernels_for(Isa isa);

/// Kernels used by the library. Defaults to the best supported ISA; the
/// environment variable TERRACLASS_SIMD=scalar forces the reference path.
const Kernels& active_kernels();
Isa active_isa();
void set_active_isa(Isa isa);

}  // namespace terraclass::simd
