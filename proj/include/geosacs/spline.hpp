#pragma once

#include "geosacs/math.hpp"

#include <span>
#include <vector>

namespace geosacs {

/// Natural cubic spline through 3-D knots at strictly increasing parameters.
/// Two knots give the straight segment.
class CubicSpline3 {
 public:
  CubicSpline3(std::span<const double> params, std::span<const Vec3> knots);

  Vec3 operator()(double u) const;

 private:
  std::vector<double> u_;
  std::vector<Vec3> y_;
  std::vector<Vec3> m_;  // second derivatives at knots
};

}  // namespace geosacs
