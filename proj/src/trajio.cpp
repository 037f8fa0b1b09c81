#include "geosacs/trajio.hpp"

#include "geosacs/error.hpp"
#include "geosacs/kernels.hpp"
#include "geosacs/spline.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>

namespace geosacs::trajio {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string row_context(const std::string& id, std::size_t line) {
  return id + ":" + std::to_string(line);
}

RawSample parse_row(std::string_view line, const std::string& id, std::size_t line_no) {
  std::array<double, 8> v{};
  std::size_t col = 0;
  while (true) {
    const std::size_t comma = line.find(',');
    const std::string_view field = trim(line.substr(0, comma));
    if (col >= v.size()) {
      throw Error(ErrorCode::MalformedRow, row_context(id, line_no) + " has more than 8 columns");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
      throw Error(ErrorCode::MalformedRow,
                  row_context(id, line_no) + " column " + std::to_string(col + 1) + " is not a number");
    }
    v[col++] = value;
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  if (col != v.size()) {
    throw Error(ErrorCode::MalformedRow,
                row_context(id, line_no) + " has " + std::to_string(col) + " columns, expected 8");
  }

  RawSample s;
  s.t = v[0];
  s.p = Vec3(v[1], v[2], v[3]);
  Quat q(v[4], v[5], v[6], v[7]);
  const double norm = q.norm();
  if (norm < 1e-9) {
    throw Error(ErrorCode::DegenerateQuaternion, row_context(id, line_no) + " has a zero-norm quaternion");
  }
  q.coeffs() /= norm;
  s.q = q;
  return s;
}

Quat mean_aligned(std::span<const Quat> qs) {
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (const Quat& q : qs) {
    acc += quat_dot(qs.front(), q) < 0.0 ? -q.coeffs() : q.coeffs();
  }
  Quat out;
  out.coeffs() = acc.normalized();
  return out;
}

std::vector<double> knot_params(const std::vector<std::size_t>& knots, std::size_t n) {
  std::vector<double> u(knots.size());
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < knots.size(); ++i) u[i] = static_cast<double>(knots[i]) / denom;
  return u;
}

double output_param(std::size_t k, std::size_t n_f) {
  return n_f == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n_f - 1);
}

// Barry-Goldman pyramid with slerp in place of lerp; reproduces the uniform
// Catmull-Rom spline for equally spaced knots.
Quat catmull_rom(const std::array<Quat, 4>& q, const std::array<double, 4>& t, double u) {
  const auto blend = [u](const Quat& a, const Quat& b, double ta, double tb) {
    return slerp(a, b, (u - ta) / (tb - ta));
  };
  const Quat a1 = blend(q[0], q[1], t[0], t[1]);
  const Quat a2 = blend(q[1], q[2], t[1], t[2]);
  const Quat a3 = blend(q[2], q[3], t[2], t[3]);
  const Quat b1 = blend(a1, a2, t[0], t[2]);
  const Quat b2 = blend(a2, a3, t[1], t[3]);
  return blend(b1, b2, t[1], t[2]);
}

// Phantom end knot: the reflection of `inner` through `end`.
Quat reflect_through(const Quat& end, const Quat& inner) {
  return slerp(inner, end, 2.0);
}

}  // namespace

Demonstration parse_demonstration(std::istream& in, std::string id) {
  Demonstration demo;
  demo.id = std::move(id);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      std::string compact;
      for (char c : row) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != kCsvHeader) {
        throw Error(ErrorCode::MalformedRow,
                    row_context(demo.id, line_no) + " header must be '" + kCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }
    RawSample s = parse_row(row, demo.id, line_no);
    if (!demo.samples.empty() && !(s.t > demo.samples.back().t)) {
      throw Error(ErrorCode::MalformedRow, row_context(demo.id, line_no) + " timestamp is not increasing");
    }
    demo.samples.push_back(s);
  }
  if (demo.samples.size() < 2) {
    throw Error(ErrorCode::TooShort, demo.id + " has " + std::to_string(demo.samples.size()) +
                                         " samples, need at least 2");
  }
  return demo;
}

std::vector<Demonstration> load_demonstrations(std::span<const std::filesystem::path> paths) {
  std::vector<Demonstration> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    out.push_back(parse_demonstration(in, path.stem().string()));
  }
  return out;
}

void write_demonstration(std::ostream& out, const Demonstration& demo) {
  out << kCsvHeader << '\n' << std::setprecision(17);
  for (const auto& s : demo.samples) {
    out << s.t << ',' << s.p.x() << ',' << s.p.y() << ',' << s.p.z() << ',' << s.q.w() << ','
        << s.q.x() << ',' << s.q.y() << ',' << s.q.z() << '\n';
  }
}

WarpPath dtw_path(const Demonstration& reference, const Demonstration& other) {
  const std::size_t n = reference.size();
  const std::size_t m = other.size();
  if (n == 0 || m == 0) throw Error(ErrorCode::EmptyInput, "DTW on an empty demonstration");

  std::vector<double> xs(m), ys(m), zs(m);
  for (std::size_t j = 0; j < m; ++j) {
    xs[j] = other.samples[j].p.x();
    ys[j] = other.samples[j].p.y();
    zs[j] = other.samples[j].p.z();
  }
  const kernels::PointsSoA pts{xs, ys, zs};

  // acc(i, j): cheapest warp ending at (i, j), row-major.
  std::vector<double> acc(n * m);
  std::vector<double> local(m);
  const auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = reference.samples[i].p;
    kernels::distances_to_point(pts, p.x(), p.y(), p.z(), local);
    for (std::size_t j = 0; j < m; ++j) {
      double best;
      if (i == 0 && j == 0) best = 0.0;
      else if (i == 0) best = at(0, j - 1);
      else if (j == 0) best = at(i - 1, 0);
      else best = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      at(i, j) = local[j] + best;
    }
  }

  WarpPath path;
  path.cost = at(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) --j;
    else if (j == 0) --i;
    else {
      const double diag = at(i - 1, j - 1);
      const double up = at(i - 1, j);
      const double left = at(i, j - 1);
      if (diag <= up && diag <= left) { --i; --j; }
      else if (up <= left) --i;
      else --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

std::vector<Demonstration> dtw_align(std::span<const Demonstration> demos, std::size_t reference) {
  if (demos.empty()) throw Error(ErrorCode::EmptyInput, "no demonstrations to align");
  if (reference >= demos.size()) {
    throw Error(ErrorCode::OutOfRange, "reference index " + std::to_string(reference) + " out of range");
  }
  const Demonstration& ref = demos[reference];
  std::vector<Demonstration> out;
  out.reserve(demos.size());
  for (std::size_t k = 0; k < demos.size(); ++k) {
    if (k == reference) {
      out.push_back(ref);
      continue;
    }
    const Demonstration& other = demos[k];
    const WarpPath path = dtw_path(ref, other);

    Demonstration warped;
    warped.id = other.id;
    warped.samples.resize(ref.size());
    std::size_t cursor = 0;
    std::vector<Quat> group;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      Vec3 sum = Vec3::Zero();
      group.clear();
      while (cursor < path.pairs.size() && path.pairs[cursor].first == i) {
        const RawSample& s = other.samples[path.pairs[cursor].second];
        sum += s.p;
        group.push_back(s.q);
        ++cursor;
      }
      RawSample& dst = warped.samples[i];
      dst.t = ref.samples[i].t;
      dst.p = sum / static_cast<double>(group.size());
      dst.q = group.size() == 1 ? group.front() : mean_aligned(group);
    }
    out.push_back(std::move(warped));
  }
  return out;
}

std::vector<std::size_t> step_filter_knots(std::size_t n) {
  if (n == 0) return {};
  const auto h = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.10 * static_cast<double>(n))));
  std::vector<std::size_t> knots;
  for (std::size_t i = 0; i < n; i += h) knots.push_back(i);
  if (knots.back() != n - 1) knots.push_back(n - 1);
  return knots;
}

std::vector<Vec3> smooth_resample_positions(const Demonstration& demo, std::size_t n_f) {
  if (demo.size() < 2) throw Error(ErrorCode::TooShort, demo.id + " needs at least 2 samples");
  if (n_f < 2) throw Error(ErrorCode::OutOfRange, "N_f must be at least 2");
  const auto knots = step_filter_knots(demo.size());
  const auto params = knot_params(knots, demo.size());
  std::vector<Vec3> pts;
  pts.reserve(knots.size());
  for (std::size_t k : knots) pts.push_back(demo.samples[k].p);
  const CubicSpline3 spline(params, pts);

  std::vector<Vec3> out(n_f);
  for (std::size_t k = 0; k < n_f; ++k) out[k] = spline(output_param(k, n_f));
  out.front() = demo.samples.front().p;
  out.back() = demo.samples.back().p;
  return out;
}

std::vector<Quat> resample_orientations(const Demonstration& demo, std::size_t n_f) {
  if (demo.size() < 2) throw Error(ErrorCode::TooShort, demo.id + " needs at least 2 samples");
  if (n_f < 2) throw Error(ErrorCode::OutOfRange, "N_f must be at least 2");
  std::vector<Quat> all(demo.size());
  for (std::size_t i = 0; i < demo.size(); ++i) all[i] = demo.samples[i].q.normalized();
  hemisphere_align(all);

  const auto knots = step_filter_knots(demo.size());
  const auto params = knot_params(knots, demo.size());
  const std::size_t k = knots.size();
  std::vector<Quat> q(k + 2);
  std::vector<double> t(k + 2);
  for (std::size_t i = 0; i < k; ++i) {
    q[i + 1] = all[knots[i]];
    t[i + 1] = params[i];
  }
  q[0] = reflect_through(q[1], q[2]);
  t[0] = 2.0 * t[1] - t[2];
  q[k + 1] = reflect_through(q[k], q[k - 1]);
  t[k + 1] = 2.0 * t[k] - t[k - 1];

  std::vector<Quat> out(n_f);
  std::size_t seg = 1;  // segment between padded knots seg and seg+1
  for (std::size_t j = 0; j < n_f; ++j) {
    const double u = output_param(j, n_f);
    while (seg + 1 < k && u > t[seg + 1]) ++seg;
    out[j] = catmull_rom({q[seg - 1], q[seg], q[seg + 1], q[seg + 2]},
                         {t[seg - 1], t[seg], t[seg + 1], t[seg + 2]}, u);
  }
  out.front() = q[1];
  out.back() = q[k];
  hemisphere_align(out);
  return out;
}

AlignedDataset preprocess(std::span<const Demonstration> demos, std::size_t n_f) {
  if (demos.empty()) throw Error(ErrorCode::EmptyInput, "no demonstrations to preprocess");
  std::size_t longest = 0;
  for (std::size_t k = 1; k < demos.size(); ++k) {
    if (demos[k].size() > demos[longest].size()) longest = k;
  }
  const auto aligned = dtw_align(demos, longest);

  AlignedDataset out;
  out.n_f = n_f;
  out.demos.reserve(aligned.size());
  const double t0 = demos[longest].samples.front().t;
  const double t1 = demos[longest].samples.back().t;
  for (const auto& demo : aligned) {
    const auto ps = smooth_resample_positions(demo, n_f);
    const auto qs = resample_orientations(demo, n_f);
    Demonstration d;
    d.id = demo.id;
    d.samples.resize(n_f);
    for (std::size_t k = 0; k < n_f; ++k) {
      d.samples[k].t = t0 + output_param(k, n_f) * (t1 - t0);
      d.samples[k].p = ps[k];
      d.samples[k].q = qs[k];
    }
    out.demos.push_back(std::move(d));
  }
  return out;
}

}  // namespace geosacs::trajio
