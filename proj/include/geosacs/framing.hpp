#pragma once

#include "geosacs/math.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace geosacs::framing {

/// Control triad attached to one disk. x_axis and y_axis span the disk plane.
/// The triad may be left-handed after a y-axis inversion.
struct CorrectionFrame {
  Vec3 e_t = Vec3::UnitZ();
  Vec3 x_axis = Vec3::UnitX();
  Vec3 y_axis = Vec3::UnitY();

  bool right_handed() const { return e_t.cross(x_axis).dot(y_axis) > 0.0; }

  /// Columns [e_t x y].
  Mat3 matrix() const {
    Mat3 m;
    m << e_t, x_axis, y_axis;
    return m;
  }

  bool operator==(const CorrectionFrame&) const = default;
};

struct FrameParams {
  double epsilon = 1e-10;   // Slerp degeneracy threshold on sin(theta)
  std::size_t window = 10;  // y-axis history length
  Vec3 x_g = Vec3::UnitX();
  Vec3 z_g = Vec3::UnitZ();
};

struct BishopFrame {
  Vec3 t;
  Vec3 normal;
  Vec3 binormal;
};

/// Central differences inside, one-sided at the ends. A point that repeats
/// its predecessor inherits the previous tangent. Throws DegenerateCurve when
/// every point coincides.
std::vector<Vec3> compute_tangents(std::span<const Vec3> directrix);

/// Parallel-transported (rotation-minimising) frames. The first normal is x_g
/// projected onto the first disk, falling back to global y.
std::vector<BishopFrame> bishop_frames(std::span<const Vec3> tangents, const Vec3& x_g = Vec3::UnitX());

/// v minus its component along e_t.
inline Vec3 project_onto_disk(const Vec3& v, const Vec3& e_t) { return v - v.dot(e_t) * e_t; }

struct CorrectionXResult {
  Vec3 x;               // not re-orthogonalised when the else-branch returns prev_x
  bool slerped = false; // true when sin(theta) > epsilon
  bool degenerate = false;  // a projection vanished; fallback used
  double theta = 0.0;   // angle between projected x_g and projected prev_x
  double theta_x = 0.0; // angle between projected x_g and x_g
  double t = 0.0;       // theta_x / (pi/2)
};

/// Blend of the projected global x-axis toward the projected previous
/// x-axis, with interpolation constant theta_x / (pi/2).
CorrectionXResult correction_x_detail(const Vec3& prev_x, const Vec3& e_t, const FrameParams& params);

inline Vec3 correction_x(const Vec3& prev_x, const Vec3& e_t, const FrameParams& params) {
  return correction_x_detail(prev_x, e_t, params).x;
}

/// Full correction-frame sweep along the directrix.
std::vector<CorrectionFrame> correction_frames(std::span<const Vec3> tangents, const FrameParams& params);

/// Re-attach a frame to a new tangent: the old x-axis is projected onto the new
/// disk, y follows from the cross product and is inverted when it points away
/// from `y_reference` (skipped when y_reference is zero).
CorrectionFrame reattach_frame(const CorrectionFrame& old, const Vec3& new_e_t, const Vec3& y_reference,
                               const FrameParams& params);

/// Rotation angle about the mean tangent in the relative rotation between two
/// consecutive frames. Zero for parallel transport.
double twist_about_tangent(const Mat3& prev, const Mat3& next);

}  // namespace geosacs::framing
