#include "geosacs/repro.hpp"

#include "geosacs/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace geosacs::repro {

namespace {

constexpr double kOnDirectrix = 1e-12;

void check_orthonormal(const framing::CorrectionFrame& f) {
  constexpr double tol = 1e-6;
  const bool ok = std::abs(f.e_t.norm() - 1.0) < tol && std::abs(f.x_axis.norm() - 1.0) < tol &&
                  std::abs(f.y_axis.norm() - 1.0) < tol && std::abs(f.e_t.dot(f.x_axis)) < tol &&
                  std::abs(f.e_t.dot(f.y_axis)) < tol && std::abs(f.x_axis.dot(f.y_axis)) < tol;
  if (!ok) throw Error(ErrorCode::NonOrthonormalFrame, "correction frame is not orthonormal");
}

Vec3 clamp_to_disk(const Vec3& offset, const framing::CorrectionFrame& f, double radius) {
  Vec3 v = framing::project_onto_disk(offset, f.e_t);
  const double len = v.norm();
  if (len > radius) v *= radius / len;
  return v;
}

double ratio_of(const Vec3& offset, double radius) {
  return radius > 0.0 ? offset.norm() / radius : 0.0;
}

}  // namespace

double ratio_schedule(const RatioStrategy& strategy, std::size_t k) {
  if (k < 1) throw Error(ErrorCode::OutOfRange, "ratio schedule index starts at 1");
  if (strategy.kind == RatioKind::Fixed) return strategy.eta_0;
  return (strategy.eta_0 - strategy.eta_f) * std::exp(-strategy.lambda * static_cast<double>(k - 1)) +
         strategy.eta_f;
}

double lambda_for_leg(std::size_t n_disks, double residual) {
  if (n_disks < 2 || residual <= 0.0 || residual >= 1.0) {
    throw Error(ErrorCode::OutOfRange, "lambda_for_leg needs n_disks >= 2 and residual in (0,1)");
  }
  return -std::log(residual) / static_cast<double>(n_disks - 1);
}

Mat3 disk_rotation(const framing::CorrectionFrame& prev, const framing::CorrectionFrame& next) {
  check_orthonormal(prev);
  check_orthonormal(next);
  return next.matrix() * prev.matrix().transpose();
}

Vec3 transfer_offset(const Vec3& offset, const framing::CorrectionFrame& prev,
                     const framing::CorrectionFrame& next) {
  return offset.dot(prev.x_axis) * next.x_axis + offset.dot(prev.y_axis) * next.y_axis;
}

std::size_t param_to_index(double d, std::size_t n_f) {
  if (!(d >= -1.0 && d <= 1.0)) throw Error(ErrorCode::OutOfRange, "canal parameter outside [-1, 1]");
  if (n_f == 0) throw Error(ErrorCode::OutOfRange, "empty canal");
  return static_cast<std::size_t>(std::llround((d + 1.0) / 2.0 * static_cast<double>(n_f - 1)));
}

double index_to_param(std::size_t s, std::size_t n_f) {
  if (s >= n_f) throw Error(ErrorCode::OutOfRange, "disk index " + std::to_string(s) + " out of range");
  if (n_f == 1) return 0.0;
  return 2.0 * static_cast<double>(s) / static_cast<double>(n_f - 1) - 1.0;
}

ReproState make_state(const canal::CanalModel& canal, std::size_t s, const Vec3& offset, Direction direction) {
  if (s >= canal.size()) throw Error(ErrorCode::OutOfRange, "disk index " + std::to_string(s) + " out of range");
  ReproState st;
  st.s = s;
  st.offset = clamp_to_disk(offset, canal.frames[s], canal.radii[s]);
  st.eta = ratio_of(st.offset, canal.radii[s]);
  st.direction = direction;
  st.d = index_to_param(s, canal.size());
  return st;
}

ReproState make_state_polar(const canal::CanalModel& canal, std::size_t s, double eta, double phi,
                            Direction direction) {
  if (s >= canal.size()) throw Error(ErrorCode::OutOfRange, "disk index " + std::to_string(s) + " out of range");
  const auto& f = canal.frames[s];
  const Vec3 offset = std::clamp(eta, 0.0, 1.0) * canal.radii[s] * (std::cos(phi) * f.x_axis + std::sin(phi) * f.y_axis);
  return make_state(canal, s, offset, direction);
}

bool can_step(const ReproState& state, const canal::CanalModel& canal) {
  return state.direction == Direction::Forward ? state.s + 1 < canal.size() : state.s > 0;
}

ReproState step(const ReproState& state, const canal::CanalModel& canal, const RatioStrategy& strategy) {
  if (!can_step(state, canal)) throw Error(ErrorCode::EndOfCanal, "no disk beyond index " + std::to_string(state.s));
  ReproState next = state;
  next.s = state.direction == Direction::Forward ? state.s + 1 : state.s - 1;
  next.leg_step = state.leg_step + 1;
  next.d = index_to_param(next.s, canal.size());

  const double r_next = canal.radii[next.s];
  const Vec3 carried = transfer_offset(state.offset, canal.frames[state.s], canal.frames[next.s]);
  const double len = carried.norm();
  if (state.offset.norm() < kOnDirectrix || len < kOnDirectrix) {
    next.offset = Vec3::Zero();
    next.eta = 0.0;
    return next;
  }
  const double eta = std::clamp(ratio_schedule(strategy, next.leg_step + 1), 0.0, 1.0);
  next.offset = eta * r_next * (carried / len);
  next.eta = eta;
  return next;
}

ReproState apply_correction(const ReproState& state, const CorrectionInput& input, const canal::CanalModel& canal) {
  const auto& f = canal.frames[state.s];
  const double kx = std::clamp(input.k_x, -1.0, 1.0);
  const double ky = std::clamp(input.k_y, -1.0, 1.0);
  ReproState next = state;
  const Vec3 moved = state.offset + (kx / input.delta) * f.x_axis + (ky / input.delta) * f.y_axis;
  next.offset = clamp_to_disk(moved, f, canal.radii[state.s]);
  next.eta = ratio_of(next.offset, canal.radii[state.s]);
  return next;
}

RatioStrategy reseeded(const RatioStrategy& strategy, const ReproState& state) {
  RatioStrategy out = strategy;
  out.eta_0 = state.eta;
  return out;
}

canal::CanalModel reverse(const canal::CanalModel& canal) {
  canal::CanalModel out = canal;
  std::reverse(out.directrix.begin(), out.directrix.end());
  std::reverse(out.radii.begin(), out.radii.end());
  std::reverse(out.mean_q.begin(), out.mean_q.end());
  std::reverse(out.sigma_q.begin(), out.sigma_q.end());
  std::reverse(out.frames.begin(), out.frames.end());
  return out;
}

}  // namespace geosacs::repro
