#include "geosacs/spline.hpp"

#include "geosacs/error.hpp"

#include <algorithm>

namespace geosacs {

CubicSpline3::CubicSpline3(std::span<const double> params, std::span<const Vec3> knots)
    : u_(params.begin(), params.end()), y_(knots.begin(), knots.end()) {
  const std::size_t n = u_.size();
  if (n < 2 || n != y_.size()) {
    throw Error(ErrorCode::TooShort, "cubic spline needs at least two knots");
  }
  m_.assign(n, Vec3::Zero());
  if (n == 2) return;

  // Thomas algorithm on the interior second derivatives.
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k);
  std::vector<Vec3> rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = u_[i] - u_[i - 1];
    const double h1 = u_[i + 1] - u_[i];
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = u_[i + 1] - u_[i];  // h_{i} for row i+1
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m_[k] = rhs[k - 1] / diag[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) {
    m_[i + 1] = (rhs[i] - upper[i] * m_[i + 2]) / diag[i];
  }
}

Vec3 CubicSpline3::operator()(double u) const {
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  std::size_t i = it == u_.begin() ? 0 : static_cast<std::size_t>(it - u_.begin()) - 1;
  i = std::min(i, u_.size() - 2);
  const double h = u_[i + 1] - u_[i];
  const double a = (u_[i + 1] - u) / h;
  const double b = (u - u_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * (h * h / 6.0);
}

}  // namespace geosacs
