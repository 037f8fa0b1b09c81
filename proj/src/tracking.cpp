#include "geosacs/tracking.hpp"

#include "geosacs/error.hpp"

#include <algorithm>
#include <cmath>

namespace geosacs::tracking {

double orientation_weight(double sigma, const WeightParams& params) {
  return std::min(params.cap, std::exp(-params.alpha * (sigma - params.beta)));
}

double pose_cost(const Pose& pose, const Vec3& target_p, const Quat& target_q, double sigma,
                 const WeightParams& params) {
  const double j_p = (pose.p - target_p).squaredNorm();
  const double angle = geodesic_angle(pose.q, target_q);
  return params.w_p * j_p + orientation_weight(sigma, params) * angle * angle;
}

double pose_cost(const Pose& pose, const Vec3& target_p, const Quat& target_q, std::size_t s,
                 const WeightParams& params, const canal::CanalModel& canal) {
  return pose_cost(pose, target_p, target_q, canal.sigma_q.at(s), params);
}

Pose resolve_pose(const Pose& current, const Vec3& target_p, const Quat& target_q, double sigma,
                  const WeightParams& params, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::OutOfRange, "resolve_pose needs dt > 0");
  const double gain = std::clamp(orientation_weight(sigma, params) / params.cap, 0.0, 1.0);
  Pose out;
  out.p = target_p;
  if (gain >= 1.0) {
    out.q = target_q.normalized();
  } else if (gain <= 0.0) {
    out.q = current.q;
  } else {
    out.q = slerp(current.q, target_q, gain);
  }
  return out;
}

Pose resolve_pose(const Pose& current, const Vec3& target_p, const Quat& target_q, std::size_t s,
                  const WeightParams& params, const canal::CanalModel& canal, double dt) {
  return resolve_pose(current, target_p, target_q, canal.sigma_q.at(s), params, dt);
}

}  // namespace geosacs::tracking
