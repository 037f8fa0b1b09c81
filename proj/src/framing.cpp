#include "geosacs/framing.hpp"

#include "geosacs/error.hpp"

#include <cmath>
#include <numbers>

namespace geosacs::framing {

namespace {

constexpr double kTinyNorm = 1e-9;

// Projection of x_g onto the disk, then global y, then anything orthogonal.
Vec3 initial_x(const Vec3& e_t, const Vec3& x_g) {
  const Vec3 a = project_onto_disk(x_g, e_t);
  if (a.norm() >= kTinyNorm) return a.normalized();
  const Vec3 b = project_onto_disk(Vec3::UnitY(), e_t);
  if (b.norm() >= kTinyNorm) return b.normalized();
  return any_perpendicular(e_t);
}

}  // namespace

std::vector<Vec3> compute_tangents(std::span<const Vec3> directrix) {
  const std::size_t n = directrix.size();
  if (n < 2) throw Error(ErrorCode::DegenerateCurve, "directrix needs at least two points");

  std::vector<Vec3> raw(n, Vec3::Zero());
  std::vector<bool> valid(n, false);
  for (std::size_t s = 0; s < n; ++s) {
    if (s > 0 && (directrix[s] - directrix[s - 1]).norm() == 0.0) continue;  // duplicate: inherit
    Vec3 d;
    if (s == 0) d = directrix[1] - directrix[0];
    else if (s + 1 == n) d = directrix[s] - directrix[s - 1];
    else d = directrix[s + 1] - directrix[s - 1];
    const double len = d.norm();
    if (len > 0.0) {
      raw[s] = d / len;
      valid[s] = true;
    }
  }

  std::size_t first = 0;
  while (first < n && !valid[first]) ++first;
  if (first == n) throw Error(ErrorCode::DegenerateCurve, "all directrix points coincide");
  for (std::size_t s = 0; s < first; ++s) raw[s] = raw[first];
  for (std::size_t s = first + 1; s < n; ++s) {
    if (!valid[s]) raw[s] = raw[s - 1];
  }
  return raw;
}

std::vector<BishopFrame> bishop_frames(std::span<const Vec3> tangents, const Vec3& x_g) {
  std::vector<BishopFrame> out;
  if (tangents.empty()) return out;
  out.reserve(tangents.size());

  Vec3 normal = initial_x(tangents[0], x_g.normalized());
  out.push_back({tangents[0], normal, tangents[0].cross(normal)});
  for (std::size_t s = 1; s < tangents.size(); ++s) {
    const Vec3& t0 = tangents[s - 1];
    const Vec3& t1 = tangents[s];
    const Vec3 axis = t0.cross(t1);
    const double sin_a = axis.norm();
    if (sin_a > 1e-15) {
      const double angle = std::atan2(sin_a, t0.dot(t1));
      normal = Eigen::AngleAxisd(angle, axis / sin_a) * normal;
    }
    normal = project_onto_disk(normal, t1);
    normal = normal.norm() >= kTinyNorm ? normal.normalized() : initial_x(t1, x_g.normalized());
    out.push_back({t1, normal, t1.cross(normal)});
  }
  return out;
}

CorrectionXResult correction_x_detail(const Vec3& prev_x, const Vec3& e_t, const FrameParams& params) {
  const Vec3 x_g = params.x_g.normalized();
  const Vec3 a = project_onto_disk(x_g, e_t);
  const Vec3 b = project_onto_disk(prev_x, e_t);

  CorrectionXResult r;
  if (a.norm() < kTinyNorm || b.norm() < kTinyNorm) {
    r.degenerate = true;
    if (b.norm() >= kTinyNorm) r.x = b.normalized();
    else if (a.norm() >= kTinyNorm) r.x = a.normalized();
    else r.x = any_perpendicular(e_t);
    return r;
  }

  const Vec3 a_hat = a.normalized();
  const Vec3 b_hat = b.normalized();
  r.theta = angle_between(a_hat, b_hat);
  r.theta_x = angle_between(a_hat, x_g);
  r.t = r.theta_x / (std::numbers::pi / 2.0);
  const double sin_theta = std::sin(r.theta);
  if (sin_theta > params.epsilon) {
    r.slerped = true;
    r.x = ((std::sin((1.0 - r.t) * r.theta) * a_hat + std::sin(r.t * r.theta) * b_hat) / sin_theta).normalized();
  } else {
    r.x = prev_x;
  }
  return r;
}

std::vector<CorrectionFrame> correction_frames(std::span<const Vec3> tangents, const FrameParams& params) {
  std::vector<CorrectionFrame> frames;
  if (tangents.empty()) return frames;
  frames.reserve(tangents.size());
  const Vec3 x_g = params.x_g.normalized();
  const std::size_t window = std::max<std::size_t>(1, params.window);

  {
    CorrectionFrame f;
    f.e_t = tangents[0];
    f.x_axis = initial_x(f.e_t, x_g);
    f.y_axis = f.e_t.cross(f.x_axis);
    frames.push_back(f);
  }

  for (std::size_t s = 1; s < tangents.size(); ++s) {
    CorrectionFrame f;
    f.e_t = tangents[s];
    Vec3 x = project_onto_disk(correction_x(frames[s - 1].x_axis, f.e_t, params), f.e_t);
    f.x_axis = x.norm() >= kTinyNorm ? x.normalized() : initial_x(f.e_t, x_g);

    const Vec3 y_prelim = f.e_t.cross(f.x_axis);
    Vec3 y_mean = Vec3::Zero();
    const std::size_t count = std::min(window, s);
    for (std::size_t k = s - count; k < s; ++k) y_mean += frames[k].y_axis;
    y_mean = project_onto_disk(y_mean / static_cast<double>(count), f.e_t);
    f.y_axis = (y_mean.norm() >= kTinyNorm && y_mean.dot(y_prelim) < 0.0) ? Vec3(-y_prelim) : y_prelim;
    frames.push_back(f);
  }
  return frames;
}

CorrectionFrame reattach_frame(const CorrectionFrame& old, const Vec3& new_e_t, const Vec3& y_reference,
                               const FrameParams& params) {
  CorrectionFrame f;
  f.e_t = new_e_t.normalized();
  const Vec3 x = project_onto_disk(old.x_axis, f.e_t);
  f.x_axis = x.norm() >= kTinyNorm ? x.normalized() : initial_x(f.e_t, params.x_g.normalized());
  const Vec3 y_prelim = f.e_t.cross(f.x_axis);
  const Vec3 ref = project_onto_disk(y_reference, f.e_t);
  f.y_axis = (ref.norm() >= kTinyNorm && ref.dot(y_prelim) < 0.0) ? Vec3(-y_prelim) : y_prelim;
  return f;
}

double twist_about_tangent(const Mat3& prev, const Mat3& next) {
  const Mat3 rel = next * prev.transpose();
  const Eigen::AngleAxisd aa(rel);
  const Vec3 omega = aa.angle() * aa.axis();
  const Vec3 t_mean = prev.col(0) + next.col(0);
  if (t_mean.norm() < kTinyNorm) return omega.norm();
  return std::abs(omega.dot(t_mean.normalized()));
}

}  // namespace geosacs::framing
