#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "simd_variants.hpp"
#include "terraclass/simd/kernels.hpp"

namespace terraclass::simd {
namespace {

constexpr Kernels kScalar{detail::squared_distances_scalar, detail::rgb_to_hsv_scalar};
#ifdef TERRACLASS_HAVE_AVX2
constexpr Kernels kAvx2{detail::squared_distances_avx2, detail::rgb_to_hsv_avx2};
#endif

Isa best_isa() {
  if (const char* env = std::getenv("TERRACLASS_SIMD"); env && std::string(env) == "scalar") return Isa::scalar;
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  return Isa::scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{best_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "?";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#ifdef TERRACLASS_HAVE_AVX2
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("SIMD variant '" + std::string(isa_name(isa)) + "' unavailable");
#ifdef TERRACLASS_HAVE_AVX2
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

const Kernels& active_kernels() { return kernels_for(active().load(std::memory_order_relaxed)); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw std::invalid_argument("SIMD variant '" + std::string(isa_name(isa)) + "' unavailable");
  active().store(isa, std::memory_order_relaxed);
}

}  // namespace terraclass::simd
