#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/framing.hpp"
#include "geosacs/math.hpp"

#include <cstddef>

namespace geosacs::repro {

enum class RatioKind { Fixed, Decay };

/// eta_k = eta_0 (fixed) or (eta_0 - eta_f) exp(-lambda (k - 1)) + eta_f (decay).
struct RatioStrategy {
  RatioKind kind = RatioKind::Fixed;
  double eta_0 = 0.0;
  double eta_f = 0.0;
  double lambda = 5e-4;
};

enum class Direction { Forward, Backward };

/// Position on the canal. Disk indices are 0-based.
struct ReproState {
  std::size_t s = 0;
  Vec3 offset = Vec3::Zero();  // from c(s), in the disk plane
  double eta = 0.0;            // |offset| / r(s)
  Direction direction = Direction::Forward;
  double d = -1.0;             // canal parameter in [-1, 1]
  std::size_t leg_step = 0;    // steps taken since the strategy was (re)installed
};

/// 2-D operator input mapped onto the current disk; delta is the sensitivity divisor.
struct CorrectionInput {
  double k_x = 0.0;
  double k_y = 0.0;
  double delta = 150.0;
};

/// k is 1-based: k = 1 is the disk where the strategy was installed.
double ratio_schedule(const RatioStrategy& strategy, std::size_t k);

/// Decay constant giving exp(-lambda (n_disks - 1)) = residual.
double lambda_for_leg(std::size_t n_disks, double residual);

/// Linear map F_next F_prev^T with F = [e_t x y]. Carries every axis of the
/// old frame onto the matching axis of the new one, so offsets keep their
/// frame coordinates; it is a reflection when the frames differ in
/// handedness. Throws NonOrthonormalFrame.
Mat3 disk_rotation(const framing::CorrectionFrame& prev, const framing::CorrectionFrame& next);

/// Offset on `prev` re-expressed with the same (x, y) coordinates on `next`.
Vec3 transfer_offset(const Vec3& offset, const framing::CorrectionFrame& prev,
                     const framing::CorrectionFrame& next);

/// Canal parameter <-> disk index (0-based): s = round((d + 1) / 2 (n_f - 1)).
std::size_t param_to_index(double d, std::size_t n_f);
double index_to_param(std::size_t s, std::size_t n_f);

/// State at disk s with an in-plane offset (projected and clamped to the rim).
ReproState make_state(const canal::CanalModel& canal, std::size_t s, const Vec3& offset,
                      Direction direction = Direction::Forward);

/// State at disk s whose offset has ratio eta along angle `phi` measured from
/// x_s toward y_s.
ReproState make_state_polar(const canal::CanalModel& canal, std::size_t s, double eta, double phi,
                            Direction direction = Direction::Forward);

bool can_step(const ReproState& state, const canal::CanalModel& canal);

/// Ratio-rule transfer to the neighbouring disk in the travel direction.
/// Throws EndOfCanal at the last disk.
ReproState step(const ReproState& state, const canal::CanalModel& canal, const RatioStrategy& strategy);

/// Displace the point on the current disk by (k_x x_s + k_y y_s) / delta,
/// clamped to the rim. The disk index and leg_step are unchanged.
ReproState apply_correction(const ReproState& state, const CorrectionInput& input, const canal::CanalModel& canal);

/// The strategy restarted from the state's current ratio.
RatioStrategy reseeded(const RatioStrategy& strategy, const ReproState& state);

/// Disk sequence reversed; frames carried over untouched.
canal::CanalModel reverse(const canal::CanalModel& canal);

}  // namespace geosacs::repro
