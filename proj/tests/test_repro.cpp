#include "geosacs/error.hpp"
#include "geosacs/repro.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace geosacs;
using namespace geosacs::repro;
using namespace geosacs::testsupport;

namespace {

// Straight canal along z with chosen radii and identical frames.
canal::CanalModel tube(std::vector<double> radii) {
  canal::CanalModel c;
  for (std::size_t s = 0; s < radii.size(); ++s) {
    c.directrix.emplace_back(0, 0, 0.01 * s);
    c.mean_q.push_back(Quat::Identity());
    c.sigma_q.push_back(0.0);
    c.frames.push_back({Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()});
  }
  c.radii = std::move(radii);
  return c;
}

RatioStrategy fixed(double eta) { return {RatioKind::Fixed, eta, 0.0, 5e-4}; }

void expect_state_invariants(const ReproState& st, const canal::CanalModel& c) {
  EXPECT_LT(std::abs(st.offset.dot(c.frames[st.s].e_t)), 1e-6);
  EXPECT_LE(st.offset.norm(), c.radii[st.s] + 1e-6);
  EXPECT_NEAR(st.eta, st.offset.norm() / c.radii[st.s], 1e-6);
}

}  // namespace

TEST(RatioSchedule, Examples) {
  const RatioStrategy decay{RatioKind::Decay, 0.8, 0.1, 0.3};
  EXPECT_EQ(ratio_schedule(decay, 1), 0.8);
  for (std::size_t k : {1u, 2u, 50u, 1000u}) EXPECT_EQ(ratio_schedule(fixed(0.37), k), 0.37);
  const RatioStrategy hundred{RatioKind::Decay, 1.0, 0.0, 0.1};
  EXPECT_NEAR(ratio_schedule(hundred, 100), std::exp(-9.9), 1e-15);
  EXPECT_NEAR(ratio_schedule(hundred, 100), 5.017e-5, 1e-8);
  EXPECT_THROW(ratio_schedule(hundred, 0), Error);
}

TEST(RatioSchedule, LambdaForLegHitsResidual) {
  const double lambda = lambda_for_leg(201, 0.05);
  const RatioStrategy s{RatioKind::Decay, 1.0, 0.0, lambda};
  EXPECT_NEAR(ratio_schedule(s, 201), 0.05, 1e-12);
  EXPECT_THROW(lambda_for_leg(1, 0.05), Error);
  EXPECT_THROW(lambda_for_leg(10, 0.0), Error);
}

TEST(DiskRotation, IdentityForIdenticalFrames) {
  const framing::CorrectionFrame f{Vec3(1, 1, 0).normalized(), Vec3(1, -1, 0).normalized(), Vec3::UnitZ()};
  EXPECT_LT((disk_rotation(f, f) - Mat3::Identity()).norm(), 1e-15);
}

TEST(DiskRotation, NinetyDegreesAboutTangentPreservesFrameCoordinates) {
  const framing::CorrectionFrame a{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  const framing::CorrectionFrame b{Vec3::UnitZ(), Vec3::UnitY(), -Vec3::UnitX()};
  const Vec3 off = 0.3 * a.x_axis + 0.7 * a.y_axis;
  const Vec3 moved = disk_rotation(a, b) * off;
  EXPECT_NEAR(moved.dot(b.x_axis), 0.3, 1e-15);
  EXPECT_NEAR(moved.dot(b.y_axis), 0.7, 1e-15);
  EXPECT_LT((transfer_offset(off, a, b) - moved).norm(), 1e-15);
}

TEST(DiskRotation, ThirtyDegreeTurnStaysInNewPlane) {
  const framing::CorrectionFrame a{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  const Eigen::AngleAxisd turn(kPi / 6, Vec3::UnitY());
  const framing::CorrectionFrame b{turn * a.e_t, turn * a.x_axis, turn * a.y_axis};
  std::mt19937_64 rng(4);
  for (int k = 0; k < 20; ++k) {
    Vec3 off = random_unit(rng);
    off.z() = 0;
    EXPECT_LT(std::abs((disk_rotation(a, b) * off).dot(b.e_t)), 1e-9);
    EXPECT_LT(std::abs(transfer_offset(off, a, b).dot(b.e_t)), 1e-9);
  }
}

TEST(DiskRotation, RejectsNonOrthonormal) {
  const framing::CorrectionFrame good{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
  const framing::CorrectionFrame bad{Vec3::UnitZ(), Vec3(1, 0.1, 0), Vec3::UnitY()};
  try {
    disk_rotation(good, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonOrthonormalFrame);
  }
}

TEST(Step, DirectrixRidingStaysOnDirectrix) {
  const auto c = synth_canal(synth::Shape::Helix);
  auto st = make_state(c, 0, Vec3::Zero());
  while (can_step(st, c)) {
    st = step(st, c, fixed(0.5));
    EXPECT_EQ(st.offset, Vec3::Zero());
  }
  EXPECT_EQ(st.s, c.size() - 1);
  EXPECT_THROW(step(st, c, fixed(0.5)), Error);
}

TEST(Step, EqualRadiiCarryOffsetUnchanged) {
  const auto c = tube(std::vector<double>(10, 0.2));
  auto st = make_state(c, 0, Vec3(0.05, -0.08, 0));
  const Vec3 start = st.offset;
  while (can_step(st, c)) {
    st = step(st, c, fixed(st.eta));
    EXPECT_LT((st.offset - start).norm(), 1e-15);
  }
}

TEST(Step, RatioRuleHalvesWithRadius) {
  const auto c = tube({0.2, 0.1});
  const auto st = make_state(c, 0, Vec3(0.1, 0, 0));
  EXPECT_NEAR(st.eta, 0.5, 1e-15);
  const auto next = step(st, c, fixed(0.5));
  EXPECT_NEAR(next.offset.norm(), 0.05, 1e-15);
  EXPECT_EQ(next.s, 1u);
  EXPECT_EQ(next.d, 1.0);
}

TEST(Step, FixedRatioInvariantAndContainment) {
  for (auto shape : synth::kAllShapes) {
    const auto c = synth_canal(shape);
    auto st = make_state_polar(c, 0, 0.7, 0.4);
    const RatioStrategy strategy = fixed(0.7);
    while (can_step(st, c)) {
      st = step(st, c, strategy);
      EXPECT_NEAR(st.eta, 0.7, 1e-9);
      expect_state_invariants(st, c);
    }
  }
}

TEST(Step, DecayConvergesAsScheduled) {
  const auto c = synth_canal(synth::Shape::Arc, 3, 0.01, 100);
  const RatioStrategy s{RatioKind::Decay, 1.0, 0.0, 0.1};
  auto st = make_state_polar(c, 0, 1.0, 0.0);
  std::size_t k = 1;
  while (can_step(st, c)) {
    st = step(st, c, s);
    ++k;
    EXPECT_LE(st.eta, std::exp(-0.1 * (k - 1)) + 1e-12);
    expect_state_invariants(st, c);
  }
  EXPECT_EQ(k, 100u);
  EXPECT_NEAR(st.eta, 5.017e-5, 1e-8);
}

TEST(Correction, ZeroInputIsNoOp) {
  const auto c = synth_canal(synth::Shape::Arc);
  const auto st = make_state_polar(c, 20, 0.3, 1.0);
  const auto out = apply_correction(st, {0.0, 0.0, 150.0}, c);
  EXPECT_EQ(out.offset, st.offset);
  EXPECT_EQ(out.eta, st.eta);
}

TEST(Correction, UnitXMovesOneOverDelta) {
  const auto c = tube(std::vector<double>(5, 0.2));
  const auto st = make_state(c, 2, Vec3::Zero());
  const auto out = apply_correction(st, {1.0, 0.0, 150.0}, c);
  EXPECT_LT((out.offset - c.frames[2].x_axis / 150.0).norm(), 1e-15);
  EXPECT_NEAR(out.offset.norm(), 1.0 / 150.0, 1e-15);
  EXPECT_EQ(out.s, st.s);
  EXPECT_EQ(out.d, st.d);
}

TEST(Correction, ClampsAtRim) {
  const auto c = tube(std::vector<double>(5, 0.01));
  auto st = make_state(c, 1, Vec3(0.01, 0, 0));
  EXPECT_NEAR(st.eta, 1.0, 1e-15);
  st = apply_correction(st, {1.0, 0.5, 150.0}, c);
  EXPECT_NEAR(st.offset.norm(), 0.01, 1e-15);
  EXPECT_NEAR(st.eta, 1.0, 1e-12);
}

TEST(Reverse, IsAnInvolutionAndKeepsFrames) {
  const auto c = synth_canal(synth::Shape::Sine);
  const auto r = reverse(c);
  const std::size_t n = c.size();
  for (std::size_t s = 0; s < n; ++s) EXPECT_EQ(r.frames[s], c.frames[n - 1 - s]);
  const auto rr = reverse(r);
  EXPECT_EQ(rr.directrix, c.directrix);
  EXPECT_EQ(rr.radii, c.radii);
  EXPECT_EQ(rr.sigma_q, c.sigma_q);
  for (std::size_t s = 0; s < n; ++s) {
    EXPECT_EQ(rr.frames[s], c.frames[s]);
    EXPECT_EQ(rr.mean_q[s].coeffs(), c.mean_q[s].coeffs());
  }
}

TEST(Reverse, ForwardThenBackwardReturnsToStart) {
  for (auto shape : synth::kAllShapes) {
    const auto c = synth_canal(shape);
    auto st = make_state_polar(c, 0, 0.6, 2.0);
    const Vec3 start = c.directrix[0] + st.offset;
    const RatioStrategy strategy = fixed(st.eta);
    while (can_step(st, c)) st = step(st, c, strategy);
    st.direction = Direction::Backward;
    while (can_step(st, c)) st = step(st, c, strategy);
    EXPECT_EQ(st.s, 0u);
    EXPECT_LT((c.directrix[0] + st.offset - start).norm(), 1e-6) << synth::to_string(shape);
  }
}

TEST(Param, IndexMapping) {
  EXPECT_EQ(param_to_index(-1.0, 200), 0u);
  EXPECT_EQ(param_to_index(1.0, 200), 199u);
  EXPECT_EQ(param_to_index(0.0, 201), 100u);
  EXPECT_THROW(param_to_index(1.5, 200), Error);
  EXPECT_THROW(index_to_param(200, 200), Error);
  const double half_step = 1.0 / 199.0;
  for (double d = -1.0; d <= 1.0; d += 0.0137) {
    EXPECT_LE(std::abs(index_to_param(param_to_index(d, 200), 200) - d), half_step + 1e-15);
  }
}
