#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Distance kernels shared by DTW cost rows and radius reduction. Each kernel
// has a scalar reference and vectorised variants; the variant is chosen once
// at runtime from CPU features and can be pinned for testing.

namespace geosacs::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

/// Best ISA the running CPU supports (honours GEOSACS_SIMD=scalar).
Isa detect_isa();

/// ISA currently used by the dispatching entry points.
Isa active_isa();

/// Pin dispatch to `isa`. Returns false (and changes nothing) when the CPU
/// or the build lacks support for it.
bool set_active_isa(Isa isa);

/// Points stored as three coordinate columns of equal length.
struct PointsSoA {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> z;

  std::size_t size() const { return x.size(); }
};

/// out[j] = |p_j - q| for every point p_j. out.size() must equal pts.size().
void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out);

/// max_j |p_j - q|, 0 for an empty set.
double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz);

namespace scalar {
void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out);
double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out);
double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out);
double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz);
}  // namespace neon
#endif

}  // namespace geosacs::kernels
