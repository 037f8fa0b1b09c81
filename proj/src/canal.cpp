#include "geosacs/canal.hpp"

#include "geosacs/error.hpp"
#include "geosacs/kernels.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>

namespace geosacs::canal {

using nlohmann::json;

namespace {

void require_dataset(const trajio::AlignedDataset& data) {
  if (data.demos.empty()) throw Error(ErrorCode::EmptyInput, "dataset has no demonstrations");
  for (const auto& d : data.demos) {
    if (d.size() != data.n_f) {
      throw Error(ErrorCode::OutOfRange, "demo " + d.id + " has " + std::to_string(d.size()) +
                                             " samples, dataset N_f is " + std::to_string(data.n_f));
    }
  }
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::MalformedCanal, std::string(what) + " must be [x,y,z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::vector<Vec3> compute_directrix(const trajio::AlignedDataset& data) {
  require_dataset(data);
  std::vector<Vec3> c(data.n_f, Vec3::Zero());
  for (const auto& demo : data.demos) {
    for (std::size_t s = 0; s < data.n_f; ++s) c[s] += demo.samples[s].p;
  }
  const double inv = 1.0 / static_cast<double>(data.n());
  for (auto& p : c) p *= inv;
  return c;
}

std::vector<double> compute_radii(const trajio::AlignedDataset& data, std::span<const Vec3> directrix,
                                  double r_min) {
  require_dataset(data);
  const std::size_t n = data.n();
  std::vector<double> xs(n), ys(n), zs(n);
  std::vector<double> r(data.n_f);
  for (std::size_t s = 0; s < data.n_f; ++s) {
    for (std::size_t m = 0; m < n; ++m) {
      const Vec3& p = data.demos[m].samples[s].p;
      xs[m] = p.x();
      ys[m] = p.y();
      zs[m] = p.z();
    }
    const double raw = kernels::max_distance_to_point({xs, ys, zs}, directrix[s].x(), directrix[s].y(),
                                                      directrix[s].z());
    r[s] = std::max(raw, r_min);
  }
  return r;
}

Quat mean_quaternion(std::span<const Quat> qs) {
  if (qs.empty()) throw Error(ErrorCode::EmptyInput, "mean of no quaternions");
  Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
  for (const Quat& q : qs) {
    const Eigen::Vector4d v = q.coeffs().normalized();
    acc += v * v.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(acc);
  Eigen::Vector4d best = solver.eigenvectors().col(3);  // eigenvalues ascending
  if (best.dot(qs.front().coeffs()) < 0.0) best = -best;
  Quat out;
  out.coeffs() = best.normalized();
  return out;
}

OrientationStats orientation_stats(const trajio::AlignedDataset& data) {
  require_dataset(data);
  OrientationStats out;
  out.mean_q.resize(data.n_f);
  out.sigma_q.resize(data.n_f);
  std::vector<Quat> qs(data.n());
  for (std::size_t s = 0; s < data.n_f; ++s) {
    for (std::size_t m = 0; m < data.n(); ++m) qs[m] = data.demos[m].samples[s].q;
    const Quat mean = mean_quaternion(qs);
    double spread = 0.0;
    for (const Quat& q : qs) spread += geodesic_angle(q, mean);
    out.mean_q[s] = mean;
    out.sigma_q[s] = spread / static_cast<double>(qs.size());
  }
  return out;
}

bool disk_crosses_plane(const CanalModel& canal, std::size_t s, double z_floor) {
  const Vec3& c = canal.directrix[s];
  const Vec3& e = canal.frames[s].e_t;
  // Vertical half-extent of a disk of radius r with unit normal e.
  const double reach = canal.radii[s] * std::sqrt(std::max(0.0, 1.0 - e.z() * e.z()));
  return std::abs(c.z() - z_floor) <= reach;
}

std::vector<IndexRange> resolve_ranges(const SupportPlane& plane, std::size_t n) {
  if (n == 0) return {};
  if (!plane.ranges.empty()) {
    std::vector<IndexRange> out;
    for (auto r : plane.ranges) {
      if (r.first > r.last || r.first >= n) continue;
      r.last = std::min(r.last, n - 1);
      out.push_back(r);
    }
    return out;
  }
  const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(n))));
  return {{0, tail - 1}, {n - tail, n - 1}};
}

CanalModel refine_cross_sections(const CanalModel& canal, std::span<const SupportPlane> planes) {
  CanalModel out = canal;
  const std::size_t n = canal.size();
  if (canal.frames.size() != n) throw Error(ErrorCode::MalformedCanal, "frames missing before refinement");
  const Vec3 z_g = canal.frame_params.z_g.normalized();
  const std::size_t window = std::max<std::size_t>(1, canal.frame_params.window);

  std::vector<bool> affected(n, false);
  for (const auto& plane : planes) {
    for (const auto& range : resolve_ranges(plane, n)) {
      for (std::size_t s = range.first; s <= range.last; ++s) {
        if (disk_crosses_plane(canal, s, plane.z_floor)) affected[s] = true;
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    if (!affected[s]) continue;
    const Vec3& e = canal.frames[s].e_t;
    const Vec3 snapped = angle_between(e, z_g) <= angle_between(e, -z_g) ? z_g : Vec3(-z_g);
    Vec3 y_ref = Vec3::Zero();
    if (s == 0) {
      y_ref = canal.frames[0].y_axis;
    } else {
      for (std::size_t k = s - std::min(window, s); k < s; ++k) y_ref += out.frames[k].y_axis;
    }
    out.frames[s] = framing::reattach_frame(canal.frames[s], snapped, y_ref, canal.frame_params);
  }
  return out;
}

CanalModel build_canal(const trajio::AlignedDataset& data, const BuildParams& params) {
  CanalModel c;
  c.directrix = compute_directrix(data);
  c.radii = compute_radii(data, c.directrix, params.r_min);
  auto stats = orientation_stats(data);
  c.mean_q = std::move(stats.mean_q);
  c.sigma_q = std::move(stats.sigma_q);
  c.r_min = params.r_min;
  c.frame_params = params.frame_params;
  for (const auto& d : data.demos) c.source_ids.push_back(d.id);
  const auto tangents = framing::compute_tangents(c.directrix);
  c.frames = framing::correction_frames(tangents, params.frame_params);
  if (!params.support_planes.empty()) c = refine_cross_sections(c, params.support_planes);
  return c;
}

json to_json(const CanalModel& canal) {
  json doc;
  const std::size_t n = canal.size();
  doc["N_f"] = n;
  json dir = json::array(), radii = json::array(), mq = json::array(), sq = json::array(), frames = json::array();
  for (std::size_t s = 0; s < n; ++s) {
    dir.push_back(vec_json(canal.directrix[s]));
    radii.push_back(canal.radii[s]);
    const Quat& q = canal.mean_q[s];
    mq.push_back(json::array({q.w(), q.x(), q.y(), q.z()}));
    sq.push_back(canal.sigma_q[s]);
    const auto& f = canal.frames[s];
    frames.push_back({{"t", vec_json(f.e_t)}, {"x", vec_json(f.x_axis)}, {"y", vec_json(f.y_axis)}});
  }
  doc["directrix"] = std::move(dir);
  doc["radii"] = std::move(radii);
  doc["mean_q"] = std::move(mq);
  doc["sigma_q"] = std::move(sq);
  doc["frames"] = std::move(frames);
  doc["meta"] = {{"N_f", n},
                 {"r_min", canal.r_min},
                 {"source_ids", canal.source_ids},
                 {"epsilon", canal.frame_params.epsilon},
                 {"window", canal.frame_params.window},
                 {"x_g", vec_json(canal.frame_params.x_g)},
                 {"z_g", vec_json(canal.frame_params.z_g)}};
  return doc;
}

CanalModel from_json(const json& doc) {
  try {
    CanalModel c;
    const std::size_t n = doc.at("N_f").get<std::size_t>();
    const auto& dir = doc.at("directrix");
    const auto& radii = doc.at("radii");
    const auto& mq = doc.at("mean_q");
    const auto& sq = doc.at("sigma_q");
    const auto& frames = doc.at("frames");
    if (dir.size() != n || radii.size() != n || mq.size() != n || sq.size() != n || frames.size() != n) {
      throw Error(ErrorCode::MalformedCanal, "array lengths disagree with N_f");
    }
    if (n < 2) throw Error(ErrorCode::MalformedCanal, "canal needs at least two disks");
    for (std::size_t s = 0; s < n; ++s) {
      c.directrix.push_back(vec_from(dir[s], "directrix"));
      c.radii.push_back(radii[s].get<double>());
      const auto& q = mq[s];
      if (!q.is_array() || q.size() != 4) throw Error(ErrorCode::MalformedCanal, "mean_q must be [w,i,j,k]");
      Quat mean(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
      if (std::abs(mean.norm() - 1.0) > 1e-12) mean.normalize();  // keeps saved unit values bit-exact
      c.mean_q.push_back(mean);
      c.sigma_q.push_back(sq[s].get<double>());
      framing::CorrectionFrame f;
      f.e_t = vec_from(frames[s].at("t"), "frame t");
      f.x_axis = vec_from(frames[s].at("x"), "frame x");
      f.y_axis = vec_from(frames[s].at("y"), "frame y");
      c.frames.push_back(f);
    }
    if (doc.contains("meta")) {
      const auto& meta = doc["meta"];
      c.r_min = meta.value("r_min", kDefaultRMin);
      c.source_ids = meta.value("source_ids", std::vector<std::string>{});
      c.frame_params.epsilon = meta.value("epsilon", c.frame_params.epsilon);
      c.frame_params.window = meta.value("window", c.frame_params.window);
      if (meta.contains("x_g")) c.frame_params.x_g = vec_from(meta["x_g"], "x_g");
      if (meta.contains("z_g")) c.frame_params.z_g = vec_from(meta["z_g"], "z_g");
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedCanal, e.what());
  }
}

void save(const CanalModel& canal, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(canal).dump(1) << '\n';
}

CanalModel load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedCanal, e.what());
  }
  return from_json(doc);
}

}  // namespace geosacs::canal
