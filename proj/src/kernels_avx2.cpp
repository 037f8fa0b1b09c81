#include "geosacs/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

// No fma in the target list: the scalar reference uses separate mul/add and
// the two paths must agree bit for bit.
#define GEOSACS_TARGET_AVX2 __attribute__((target("avx2")))

namespace geosacs::kernels::avx2 {

GEOSACS_TARGET_AVX2
void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out) {
  const std::size_t n = pts.size();
  const __m256d vx = _mm256_set1_pd(qx);
  const __m256d vy = _mm256_set1_pd(qy);
  const __m256d vz = _mm256_set1_pd(qz);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x.data() + j), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y.data() + j), vy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z.data() + j), vz);
    __m256d acc = _mm256_mul_pd(dx, dx);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dy, dy));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dz, dz));
    _mm256_storeu_pd(out.data() + j, _mm256_sqrt_pd(acc));
  }
  for (; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    out[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

GEOSACS_TARGET_AVX2
double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz) {
  const std::size_t n = pts.size();
  const __m256d vx = _mm256_set1_pd(qx);
  const __m256d vy = _mm256_set1_pd(qy);
  const __m256d vz = _mm256_set1_pd(qz);
  __m256d best4 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(pts.x.data() + j), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(pts.y.data() + j), vy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(pts.z.data() + j), vz);
    __m256d acc = _mm256_mul_pd(dx, dx);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dy, dy));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dz, dz));
    best4 = _mm256_max_pd(best4, acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best4);
  double best = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    best = std::max(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

}  // namespace geosacs::kernels::avx2

#endif
