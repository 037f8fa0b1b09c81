#include "geosacs/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace geosacs::kernels {

namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

Isa detect_isa() {
  if (const char* env = std::getenv("GEOSACS_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Isa::Scalar;
  }
  if (cpu_has(Isa::Avx2)) return Isa::Avx2;
  if (cpu_has(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!cpu_has(isa)) return false;
  active().store(isa, std::memory_order_relaxed);
  return true;
}

void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out) {
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2::distances_to_point(pts, qx, qy, qz, out);
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon::distances_to_point(pts, qx, qy, qz, out);
#endif
    default: return scalar::distances_to_point(pts, qx, qy, qz, out);
  }
}

double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz) {
  switch (active_isa()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return avx2::max_distance_to_point(pts, qx, qy, qz);
#endif
#if defined(__aarch64__)
    case Isa::Neon: return neon::max_distance_to_point(pts, qx, qy, qz);
#endif
    default: return scalar::max_distance_to_point(pts, qx, qy, qz);
  }
}

}  // namespace geosacs::kernels
