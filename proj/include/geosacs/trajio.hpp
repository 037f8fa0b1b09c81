#pragma once

#include "geosacs/math.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace geosacs::trajio {

struct RawSample {
  double t = 0.0;   // seconds
  Vec3 p = Vec3::Zero();  // meters
  Quat q = Quat::Identity();
};

struct Demonstration {
  std::string id;
  std::vector<RawSample> samples;

  std::size_t size() const { return samples.size(); }
};

/// n demonstrations resampled to a common length n_f.
struct AlignedDataset {
  std::vector<Demonstration> demos;
  std::size_t n_f = 0;

  std::size_t n() const { return demos.size(); }
};

inline constexpr const char* kCsvHeader = "t,x,y,z,qw,qx,qy,qz";
inline constexpr std::size_t kDefaultNf = 200;

/// Parse one demonstration in the `t,x,y,z,qw,qx,qy,qz` CSV format.
/// Throws Error{MalformedRow | DegenerateQuaternion | TooShort}.
Demonstration parse_demonstration(std::istream& in, std::string id);

std::vector<Demonstration> load_demonstrations(std::span<const std::filesystem::path> paths);

void write_demonstration(std::ostream& out, const Demonstration& demo);

struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (reference, other), monotone
  double cost = 0.0;
};

/// Classic DTW between two demonstrations on Euclidean position distance.
WarpPath dtw_path(const Demonstration& reference, const Demonstration& other);

/// Warp every demo onto the time base of demos[reference]. Samples collapsed
/// onto one reference index are averaged (positions arithmetically,
/// quaternions after hemisphere alignment).
std::vector<Demonstration> dtw_align(std::span<const Demonstration> demos, std::size_t reference);

/// Step-filter knot indices for a trajectory of n samples: every h-th sample
/// with h = max(1, round(0.1 n)), always including the last.
std::vector<std::size_t> step_filter_knots(std::size_t n);

std::vector<Vec3> smooth_resample_positions(const Demonstration& demo, std::size_t n_f);

/// Catmull-Rom quaternion spline through the step-filter knots, sampled at
/// the same parameters as smooth_resample_positions.
std::vector<Quat> resample_orientations(const Demonstration& demo, std::size_t n_f);

/// DTW onto the longest demo, then step-filter smoothing and resampling.
AlignedDataset preprocess(std::span<const Demonstration> demos, std::size_t n_f = kDefaultNf);

}  // namespace geosacs::trajio
