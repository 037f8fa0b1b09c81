#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/math.hpp"
#include "geosacs/synth.hpp"
#include "geosacs/trajio.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace geosacs::testsupport {

inline constexpr double kPi = std::numbers::pi;

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec3 v;
  do {
    v = Vec3(g(rng), g(rng), g(rng));
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Quat q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized();
}

inline Quat about(const Vec3& axis, double angle) { return Quat(Eigen::AngleAxisd(angle, axis.normalized())); }

inline trajio::AlignedDataset synth_dataset(synth::Shape shape, std::size_t n_demos = 3, double spread = 0.01,
                                            std::size_t n_f = 200, std::uint64_t seed = 1) {
  synth::SynthParams p;
  p.shape = shape;
  p.n_demos = n_demos;
  p.spread = spread;
  p.seed = seed;
  return trajio::preprocess(synth::generate(p), n_f);
}

inline canal::CanalModel synth_canal(synth::Shape shape, std::size_t n_demos = 3, double spread = 0.01,
                                     std::size_t n_f = 200, std::uint64_t seed = 1) {
  return canal::build_canal(synth_dataset(shape, n_demos, spread, n_f, seed));
}

/// Demonstration sampled from a callable path p(u) with constant orientation.
template <typename F>
trajio::Demonstration demo_from(F&& path, std::size_t n, const Quat& q = Quat::Identity(), std::string id = "d") {
  trajio::Demonstration d;
  d.id = std::move(id);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n - 1);
    d.samples.push_back({0.05 * static_cast<double>(k), path(u), q});
  }
  return d;
}

}  // namespace geosacs::testsupport
