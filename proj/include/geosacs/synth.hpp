#pragma once

#include "geosacs/math.hpp"
#include "geosacs/trajio.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace geosacs::synth {

enum class Shape { Line, Arc, Helix, UCurve, Sine };

std::string_view to_string(Shape shape);
std::optional<Shape> shape_from_string(std::string_view name);
inline constexpr Shape kAllShapes[] = {Shape::Line, Shape::Arc, Shape::Helix, Shape::UCurve, Shape::Sine};

struct SynthParams {
  Shape shape = Shape::Arc;
  std::size_t n_demos = 3;
  std::size_t samples = 150;  // nominal; each demo varies by up to +-20%
  double spread = 0.01;       // lateral offset scale, metres
  double noise = 0.0;         // per-sample position noise, metres
  double tilt_deg = 10.0;     // per-demo orientation tilt scale
  double duration = 5.0;      // seconds
  std::uint64_t seed = 1;
};

/// Nominal path point for u in [0, 1].
Vec3 shape_point(Shape shape, double u);

/// Demo 0 follows the nominal path exactly (apart from noise); the others
/// carry a lateral offset, a monotone time warp and a different length.
std::vector<trajio::Demonstration> generate(const SynthParams& params);

}  // namespace geosacs::synth
