#include "geosacs/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>

namespace geosacs::kernels::neon {

void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out) {
  const std::size_t n = pts.size();
  const float64x2_t vx = vdupq_n_f64(qx);
  const float64x2_t vy = vdupq_n_f64(qy);
  const float64x2_t vz = vdupq_n_f64(qz);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(pts.x.data() + j), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(pts.y.data() + j), vy);
    const float64x2_t dz = vsubq_f64(vld1q_f64(pts.z.data() + j), vz);
    float64x2_t acc = vmulq_f64(dx, dx);
    acc = vaddq_f64(acc, vmulq_f64(dy, dy));
    acc = vaddq_f64(acc, vmulq_f64(dz, dz));
    vst1q_f64(out.data() + j, vsqrtq_f64(acc));
  }
  for (; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    out[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz) {
  const std::size_t n = pts.size();
  const float64x2_t vx = vdupq_n_f64(qx);
  const float64x2_t vy = vdupq_n_f64(qy);
  const float64x2_t vz = vdupq_n_f64(qz);
  float64x2_t best2 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(pts.x.data() + j), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(pts.y.data() + j), vy);
    const float64x2_t dz = vsubq_f64(vld1q_f64(pts.z.data() + j), vz);
    float64x2_t acc = vmulq_f64(dx, dx);
    acc = vaddq_f64(acc, vmulq_f64(dy, dy));
    acc = vaddq_f64(acc, vmulq_f64(dz, dz));
    best2 = vmaxq_f64(best2, acc);
  }
  double best = std::max(vgetq_lane_f64(best2, 0), vgetq_lane_f64(best2, 1));
  for (; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    best = std::max(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

}  // namespace geosacs::kernels::neon

#endif
