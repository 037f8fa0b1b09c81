#pragma once

#include "geosacs/framing.hpp"
#include "geosacs/math.hpp"
#include "geosacs/trajio.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geosacs::canal {

inline constexpr double kDefaultRMin = 1e-4;

/// Discretised canal surface: one circular disk per directrix point.
struct CanalModel {
  std::vector<Vec3> directrix;
  std::vector<double> radii;
  std::vector<Quat> mean_q;
  std::vector<double> sigma_q;  // mean absolute geodesic deviation, radians
  std::vector<framing::CorrectionFrame> frames;
  double r_min = kDefaultRMin;
  std::vector<std::string> source_ids;
  framing::FrameParams frame_params;

  std::size_t size() const { return directrix.size(); }
};

struct OrientationStats {
  std::vector<Quat> mean_q;
  std::vector<double> sigma_q;
};

/// Inclusive index range [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Horizontal support surface z = z_floor. Empty `ranges` means the first
/// and last 10% of disk indices.
struct SupportPlane {
  double z_floor = 0.0;
  std::vector<IndexRange> ranges;
};

struct BuildParams {
  double r_min = kDefaultRMin;
  framing::FrameParams frame_params;
  std::vector<SupportPlane> support_planes;
};

std::vector<Vec3> compute_directrix(const trajio::AlignedDataset& data);

std::vector<double> compute_radii(const trajio::AlignedDataset& data, std::span<const Vec3> directrix,
                                  double r_min = kDefaultRMin);

/// Principal eigenvector of sum q q^T, sign matched to the first input.
Quat mean_quaternion(std::span<const Quat> qs);

OrientationStats orientation_stats(const trajio::AlignedDataset& data);

/// Disk `s` crosses the plane z = z_floor within its radius.
bool disk_crosses_plane(const CanalModel& canal, std::size_t s, double z_floor);

/// Index ranges a support plane applies to, resolved for a canal of n disks.
std::vector<IndexRange> resolve_ranges(const SupportPlane& plane, std::size_t n);

/// Snap tangents of disks crossing a support plane to +z_g or -z_g
/// (whichever is closer) and re-attach their correction frames.
CanalModel refine_cross_sections(const CanalModel& canal, std::span<const SupportPlane> planes);

CanalModel build_canal(const trajio::AlignedDataset& data, const BuildParams& params = {});

nlohmann::json to_json(const CanalModel& canal);
CanalModel from_json(const nlohmann::json& doc);

void save(const CanalModel& canal, const std::filesystem::path& path);
CanalModel load(const std::filesystem::path& path);

}  // namespace geosacs::canal
