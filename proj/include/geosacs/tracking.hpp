#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/math.hpp"

#include <cstddef>

namespace geosacs::tracking {

struct WeightParams {
  double alpha = 9.0;
  double beta = 0.3;
  double cap = 15.0;   // b
  double w_p = 100.0;
};

struct Pose {
  Vec3 p = Vec3::Zero();
  Quat q = Quat::Identity();
};

/// min(cap, exp(-alpha (sigma - beta))): tight demonstrated orientation
/// spread yields a large weight.
double orientation_weight(double sigma, const WeightParams& params);

/// w_p |p - target_p|^2 + w_o(sigma) angle(q, target_q)^2.
double pose_cost(const Pose& pose, const Vec3& target_p, const Quat& target_q, double sigma,
                 const WeightParams& params);

double pose_cost(const Pose& pose, const Vec3& target_p, const Quat& target_q, std::size_t s,
                 const WeightParams& params, const canal::CanalModel& canal);

/// Simulated free-flying end-effector: position snaps to the target, the
/// orientation slerps toward target_q by min(1, w_o / cap).
Pose resolve_pose(const Pose& current, const Vec3& target_p, const Quat& target_q, double sigma,
                  const WeightParams& params, double dt);

Pose resolve_pose(const Pose& current, const Vec3& target_p, const Quat& target_q, std::size_t s,
                  const WeightParams& params, const canal::CanalModel& canal, double dt);

}  // namespace geosacs::tracking
