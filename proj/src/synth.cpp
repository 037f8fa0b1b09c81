#include "geosacs/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace geosacs::synth {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Line: return "line";
    case Shape::Arc: return "arc";
    case Shape::Helix: return "helix";
    case Shape::UCurve: return "ucurve";
    case Shape::Sine: return "sine";
  }
  return "?";
}

std::optional<Shape> shape_from_string(std::string_view name) {
  for (Shape s : kAllShapes) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

Vec3 shape_point(Shape shape, double u) {
  switch (shape) {
    case Shape::Line:
      return {0.4, -0.3 + 0.6 * u, 0.2};
    case Shape::Arc:
      return {0.3 * std::cos(kPi * u), 0.3 * std::sin(kPi * u), 0.2};
    case Shape::Helix:
      return {0.2 * std::cos(4.0 * kPi * u), 0.2 * std::sin(4.0 * kPi * u), 0.1 + 0.3 * u};
    case Shape::UCurve: {
      // Pick at z = 0.05, lift to 0.30, place at z = 0.05.
      const double lift = std::sin(kPi * u);
      return {-0.3 + 0.6 * u, 0.4, 0.05 + 0.25 * lift};
    }
    case Shape::Sine:
      return {-0.3 + 0.6 * u, 0.1 * std::sin(2.0 * kPi * u), 0.2};
  }
  return Vec3::Zero();
}

std::vector<trajio::Demonstration> generate(const SynthParams& params) {
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<trajio::Demonstration> demos;
  demos.reserve(params.n_demos);
  for (std::size_t i = 0; i < params.n_demos; ++i) {
    const bool nominal = i == 0;
    const Vec3 offset = nominal ? Vec3(Vec3::Zero()) : Vec3(Vec3(gauss(rng), gauss(rng), gauss(rng)) * params.spread);
    const double warp = nominal ? 1.0 : std::exp(0.2 * unit(rng));
    const double stretch = nominal ? 0.0 : 0.2 * unit(rng);
    const std::size_t m =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(params.samples * (1.0 + stretch))));
    const double duration = params.duration * (1.0 + 0.5 * stretch);
    const double yaw0 = nominal ? 0.0 : 0.05 * gauss(rng);
    const double tilt = nominal ? 0.0 : params.tilt_deg * kPi / 180.0 * gauss(rng);

    trajio::Demonstration demo;
    demo.id = "synth-" + std::string(to_string(params.shape)) + "-" + std::to_string(i);
    demo.samples.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double tau = static_cast<double>(k) / static_cast<double>(m - 1);
      const double u = std::pow(tau, warp);
      Vec3 p = shape_point(params.shape, u) + offset;
      if (params.noise > 0.0) p += Vec3(gauss(rng), gauss(rng), gauss(rng)) * params.noise;
      const Quat q(Eigen::AngleAxisd(yaw0 + 0.5 * kPi * u, Vec3::UnitZ()) * Eigen::AngleAxisd(tilt, Vec3::UnitX()));
      demo.samples.push_back({duration * tau, p, q.normalized()});
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

}  // namespace geosacs::synth
