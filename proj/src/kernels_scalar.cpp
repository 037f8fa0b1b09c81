#include "geosacs/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace geosacs::kernels::scalar {

void distances_to_point(const PointsSoA& pts, double qx, double qy, double qz,
                        std::span<double> out) {
  const std::size_t n = pts.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    out[j] = std::sqrt(dx * dx + dy * dy + dz * dz);
  }
}

double max_distance_to_point(const PointsSoA& pts, double qx, double qy, double qz) {
  double best = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = pts.x[j] - qx;
    const double dy = pts.y[j] - qy;
    const double dz = pts.z[j] - qz;
    best = std::max(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

}  // namespace geosacs::kernels::scalar
