// Headless acceptance run. Each criterion prints one PASS or FAIL line with
// the measured quantities; the exit status is non-zero if any criterion fails.

#include "../support.hpp"
#include "../ws_client.hpp"

#include "geosacs/canal.hpp"
#include "geosacs/framing.hpp"
#include "geosacs/repro.hpp"
#include "geosacs/server.hpp"
#include "geosacs/session.hpp"
#include "geosacs/tracking.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

using namespace geosacs;
using namespace geosacs::testsupport;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects named checks; the first failing check is reported in the detail.
class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      failed_ = what;
    }
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }
  Outcome outcome() const {
    return {pass_, pass_ ? notes_ : "failed: " + failed_ + (notes_.empty() ? "" : " | " + notes_)};
  }

 private:
  bool pass_ = true;
  std::string failed_;
  std::string notes_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double angle(const Vec3& a, const Vec3& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

std::vector<Vec3> tangents_of(const canal::CanalModel& c) {
  std::vector<Vec3> t;
  for (const auto& f : c.frames) t.push_back(f.e_t);
  return t;
}

Mat3 bishop_matrix(const framing::BishopFrame& f) {
  Mat3 m;
  m << f.t, f.normal, f.binormal;
  return m;
}

// Wide arc canal shared by the criteria that drive a session.
std::shared_ptr<const canal::CanalModel> session_canal() {
  static const auto c = std::make_shared<const canal::CanalModel>(synth_canal(synth::Shape::Arc, 4, 0.1, 201));
  return c;
}

// ---------------------------------------------------------------------------

Outcome frame_validity() {
  Checks ck;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_ortho = 0.0, worst_twist = 0.0;
  for (auto shape : synth::kAllShapes) {
    const auto c = synth_canal(shape);
    for (const auto& f : c.frames) {
      worst_ortho = std::max({worst_ortho, std::abs(f.e_t.norm() - 1), std::abs(f.x_axis.norm() - 1),
                              std::abs(f.y_axis.norm() - 1), std::abs(f.e_t.dot(f.x_axis)),
                              std::abs(f.e_t.dot(f.y_axis)), std::abs(f.x_axis.dot(f.y_axis))});
    }
    const auto bishop = framing::bishop_frames(tangents_of(c));
    for (std::size_t s = 1; s < bishop.size(); ++s) {
      worst_twist =
          std::max(worst_twist, framing::twist_about_tangent(bishop_matrix(bishop[s - 1]), bishop_matrix(bishop[s])));
    }
  }
  const double elapsed = seconds_since(t0);
  ck.require(worst_ortho < 1e-9, "correction frames orthonormal within 1e-9");
  ck.require(worst_twist < 1e-9, "Bishop twist below 1e-9 per step");
  ck.require(elapsed < 1.0, "runtime below 1 s");
  ck.note("max orthonormality error " + fmt("%.2e", worst_ortho));
  ck.note("max Bishop twist " + fmt("%.2e", worst_twist));
  ck.note("runtime " + fmt("%.3f s", elapsed));
  return ck.outcome();
}

Outcome frame_consistency() {
  Checks ck;
  const auto c = synth_canal(synth::Shape::Helix);
  const auto bishop = framing::bishop_frames(tangents_of(c));
  const Vec3 xg = Vec3::UnitX();
  double mean_x = 0.0, mean_n = 0.0;
  double step_corr = 0.0, step_bishop = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) {
    mean_x += angle(c.frames[s].x_axis, xg);
    mean_n += angle(bishop[s].normal, xg);
    if (s == 0) continue;
    // Per-step change of each axis' angle to the global x-axis.
    const auto drift = [&](const Vec3& a, const Vec3& b) { return std::abs(angle(b, xg) - angle(a, xg)); };
    step_corr = std::max({step_corr, drift(c.frames[s - 1].x_axis, c.frames[s].x_axis),
                          drift(c.frames[s - 1].y_axis, c.frames[s].y_axis)});
    step_bishop = std::max({step_bishop, drift(bishop[s - 1].normal, bishop[s].normal),
                            drift(bishop[s - 1].binormal, bishop[s].binormal)});
  }
  mean_x /= static_cast<double>(c.size());
  mean_n /= static_cast<double>(c.size());
  ck.require(mean_x < mean_n, "mean angle(x_s, x_G) below mean angle(normal, x_G)");
  ck.require(step_corr < step_bishop, "max per-step x_G drift of (x_s, y_s) below Bishop (normal, binormal)");
  ck.note("mean angle to x_G: correction " + fmt("%.4f", mean_x) + " rad, Bishop " + fmt("%.4f", mean_n) + " rad");
  ck.note("max per-step drift: correction " + fmt("%.4f", step_corr) + " rad, Bishop " + fmt("%.4f", step_bishop) +
          " rad");
  return ck.outcome();
}

Vec3 rodrigues(const Vec3& a, const Vec3& k, double phi) {
  return a * std::cos(phi) + k.cross(a) * std::sin(phi) + k * k.dot(a) * (1.0 - std::cos(phi));
}

Vec3 oracle_correction_x(const Vec3& prev_x, const Vec3& e_t) {
  const Vec3 xg = Vec3::UnitX();
  const Vec3 a = (xg - xg.dot(e_t) * e_t).normalized();
  const Vec3 b = (prev_x - prev_x.dot(e_t) * e_t).normalized();
  const double theta = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  const double t = std::acos(std::clamp(a.dot(xg), -1.0, 1.0)) / (kPi / 2.0);
  return rodrigues(a, a.cross(b).normalized(), t * theta);
}

Outcome slerp_fidelity() {
  Checks ck;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  bool all_slerped = true;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 e_t = random_unit(rng);
    const Vec3 prev = random_unit(rng);
    const auto r = framing::correction_x_detail(prev, e_t, {});
    all_slerped = all_slerped && r.slerped;
    worst = std::max(worst, (r.x - oracle_correction_x(prev, e_t)).norm());
  }
  ck.require(all_slerped, "random pairs take the Slerp branch");
  ck.require(worst < 1e-9, "agreement with the axis-angle oracle within 1e-9");

  bool branch_exact = true;
  int probes = 0;
  for (double theta = 0.5e-10; theta < 2e-10; theta += 0.01e-10, ++probes) {
    const Vec3 prev(std::cos(theta), std::sin(theta), 0.0);
    const auto r = framing::correction_x_detail(prev, Vec3::UnitZ(), {});
    branch_exact = branch_exact && (r.slerped == (std::sin(theta) > 1e-10));
    if (!r.slerped) branch_exact = branch_exact && r.x == prev;
  }
  ck.require(branch_exact, "else branch exactly when sin(theta) <= 1e-10");
  ck.note("max oracle deviation " + fmt("%.2e", worst) + " over 1000 pairs");
  ck.note(std::to_string(probes) + " threshold probes");
  return ck.outcome();
}

Outcome ratio_rule() {
  Checks ck;
  double worst_eta = 0.0, worst_contain = 0.0;
  for (auto shape : synth::kAllShapes) {
    const auto c = synth_canal(shape);
    auto st = repro::make_state_polar(c, 0, 0.7, 0.4);
    const repro::RatioStrategy fixed{repro::RatioKind::Fixed, 0.7, 0.7};
    while (repro::can_step(st, c)) {
      st = repro::step(st, c, fixed);
      worst_eta = std::max(worst_eta, std::abs(st.eta - 0.7));
      worst_contain = std::max(worst_contain, st.offset.norm() - c.radii[st.s]);
    }
  }
  const auto c100 = synth_canal(synth::Shape::Arc, 3, 0.01, 100);
  const repro::RatioStrategy decay{repro::RatioKind::Decay, 1.0, 0.0, 0.1};
  auto st = repro::make_state_polar(c100, 0, 1.0, 0.0);
  std::size_t k = 1;
  while (repro::can_step(st, c100)) {
    st = repro::step(st, c100, decay);
    ++k;
    worst_contain = std::max(worst_contain, st.offset.norm() - c100.radii[st.s]);
  }
  ck.require(worst_eta < 1e-9, "fixed strategy preserves eta within 1e-9");
  ck.require(k == 100 && std::abs(st.eta - 5.017e-5) <= 1e-8, "decay reaches 5.017e-5 at disk 100");
  ck.require(worst_contain <= 1e-6, "reproduced points inside disk radii");
  ck.note("max fixed eta drift " + fmt("%.2e", worst_eta));
  ck.note("eta(100) " + fmt("%.6e", st.eta));
  ck.note("max radius excess " + fmt("%.2e", worst_contain));
  return ck.outcome();
}

Outcome backtracking() {
  Checks ck;
  double worst = 0.0;
  bool involution = true;
  for (auto shape : synth::kAllShapes) {
    const auto c = synth_canal(shape);
    auto st = repro::make_state_polar(c, 0, 0.6, 2.0);
    const Vec3 start = c.directrix[0] + st.offset;
    const repro::RatioStrategy fixed{repro::RatioKind::Fixed, st.eta, st.eta};
    while (repro::can_step(st, c)) st = repro::step(st, c, fixed);
    st.direction = repro::Direction::Backward;
    while (repro::can_step(st, c)) st = repro::step(st, c, fixed);
    worst = std::max(worst, st.s == 0 ? (c.directrix[0] + st.offset - start).norm() : 1.0);

    const auto rr = repro::reverse(repro::reverse(c));
    involution = involution && rr.directrix == c.directrix && rr.radii == c.radii && rr.sigma_q == c.sigma_q &&
                 rr.frames == c.frames;
    for (std::size_t s = 0; s < c.size(); ++s) involution = involution && rr.mean_q[s].coeffs() == c.mean_q[s].coeffs();
  }
  ck.require(worst < 1e-6, "round trip returns to start within 1e-6 m");
  ck.require(involution, "reverse(reverse(c)) equals c exactly");
  ck.note("max round-trip error " + fmt("%.2e", worst) + " m");
  return ck.outcome();
}

// Drives a session through scripted_drive: autonomous ticks, then a held
// (1, 0) correction. Returns the offset after each correction tick together
// with the frame it was applied in.
struct CorrectionTrace {
  Vec3 before;
  std::vector<Vec3> offsets;
  framing::CorrectionFrame frame;
  double radius = 0.0;
};

CorrectionTrace drive_correction(std::size_t lead, std::size_t ticks) {
  session::Session s(session_canal(), {});
  server::scripted_drive(s, {}, lead);
  CorrectionTrace trace;
  trace.before = s.state().repro.offset;
  const std::vector<server::ScriptEntry> press{{0, session::Command::correction(1.0, 0.0)}};
  server::scripted_drive(s, press, 1);
  trace.offsets.push_back(s.state().repro.offset);
  for (std::size_t k = 1; k < ticks; ++k) {
    server::scripted_drive(s, {}, 1);
    trace.offsets.push_back(s.state().repro.offset);
  }
  trace.frame = s.canal().frames[s.state().repro.s];
  trace.radius = s.canal().radii[s.state().repro.s];
  return trace;
}

Outcome correction_mapping() {
  Checks ck;
  const std::size_t lead = 12;
  const std::size_t T = 10;
  const auto trace = drive_correction(lead, T);
  ck.require((trace.before + T * trace.frame.x_axis / 150.0).norm() < trace.radius, "setup stays below the rim");
  double worst = 0.0;
  for (std::size_t k = 1; k <= T; ++k) {
    worst = std::max(worst, (trace.offsets[k - 1] - trace.before - k * trace.frame.x_axis / 150.0).norm());
  }
  ck.require(worst <= 1e-9, "offset displaced by T/150 along x_s");

  const std::size_t saturate = static_cast<std::size_t>(std::ceil(2.0 * trace.radius * 150.0)) + 5;
  const auto held = drive_correction(lead, saturate);
  const double rim_error = std::abs(held.offsets.back().norm() - held.radius);
  ck.require(rim_error <= 1e-9, "clamped offset norm equals r(s)");
  ck.note("max displacement error " + fmt("%.2e", worst) + " over " + std::to_string(T) + " ticks");
  ck.note("rim error " + fmt("%.2e", rim_error) + " after " + std::to_string(saturate) + " ticks");
  return ck.outcome();
}

double quat_objective(std::span<const Quat> qs, const Eigen::Vector4d& v) {
  double sum = 0.0;
  for (const auto& q : qs) sum += std::pow(q.coeffs().dot(v), 2);
  return sum;
}

double dense_oracle(std::span<const Quat> qs) {
  double best = 0.0;
  const int n = 48;
  for (int a = 0; a < n; ++a) {
    const double eta = 0.5 * kPi * (a + 0.5) / n;
    for (int b = 0; b < n; ++b) {
      const double xi1 = 2.0 * kPi * b / n;
      for (int c = 0; c < n; ++c) {
        const double xi2 = 2.0 * kPi * c / n;
        const Eigen::Vector4d v(std::sin(eta) * std::cos(xi1), std::sin(eta) * std::sin(xi1),
                                std::cos(eta) * std::cos(xi2), std::cos(eta) * std::sin(xi2));
        best = std::max(best, quat_objective(qs, v));
      }
    }
  }
  return best;
}

Outcome orientation_statistics() {
  Checks ck;
  std::mt19937_64 rng(33);
  double worst_gap = 0.0;
  for (std::size_t n : {1u, 2u, 3u, 3u}) {
    std::vector<Quat> qs;
    const Quat base = random_quat(rng);
    for (std::size_t k = 0; k < n; ++k) qs.push_back((base * about(random_unit(rng), 0.6)).normalized());
    const double eig = quat_objective(qs, canal::mean_quaternion(qs).coeffs());
    worst_gap = std::max(worst_gap, dense_oracle(qs) - eig);
  }
  ck.require(worst_gap <= 1e-3, "eigen mean within 1e-3 of the dense oracle objective");

  bool flip_exact = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Quat a = random_quat(rng), b = random_quat(rng);
    const Quat nb(-b.w(), -b.x(), -b.y(), -b.z());
    const std::vector<Quat> plain{a, b}, flipped{a, nb};
    flip_exact = flip_exact && canal::mean_quaternion(plain).coeffs() == canal::mean_quaternion(flipped).coeffs();
  }
  ck.require(flip_exact, "sign-flip invariance exact");

  const double deg = kPi / 180.0;
  trajio::AlignedDataset data;
  data.n_f = 2;
  for (double a : {0.0, 20.0}) {
    trajio::Demonstration d;
    d.id = "q" + std::to_string(static_cast<int>(a));
    const Quat q = about(Vec3::UnitZ(), a * deg);
    d.samples = {{0.0, Vec3::Zero(), q}, {0.1, Vec3::UnitZ(), q}};
    data.demos.push_back(d);
  }
  const auto stats = canal::orientation_stats(data);
  const double mean_err = geodesic_angle(stats.mean_q[0], about(Vec3::UnitZ(), 10 * deg));
  ck.require(mean_err <= 1e-6, "20 degree pair mean at 10 degrees");
  // 0.17453 is ten degrees in radians rounded to five places; the oracle is
  // the exact value, and the rounded constant is checked to its precision.
  ck.require(std::abs(stats.sigma_q[0] - 10 * deg) <= 1e-6, "20 degree pair sigma equals 10 degrees");
  ck.require(std::abs(stats.sigma_q[0] - 0.17453) <= 0.5e-5, "20 degree pair sigma rounds to 0.17453");
  ck.note("max oracle gap " + fmt("%.2e", worst_gap));
  ck.note("pair mean error " + fmt("%.2e", mean_err) + " rad, sigma " + fmt("%.7f", stats.sigma_q[0]));
  return ck.outcome();
}

Outcome weight_schedule() {
  Checks ck;
  const tracking::WeightParams table{};
  const double w_beta = tracking::orientation_weight(0.3, table);
  const double w_zero = tracking::orientation_weight(0.0, table);
  ck.require(w_beta == 1.0, "w(beta) == 1");
  ck.require(std::abs(w_zero - 14.8797) <= 1e-4, "w(0) == e^2.7");
  const double threshold = table.beta - std::log(table.cap) / table.alpha;
  bool capped = true;
  for (double s : {threshold - 1e-6, threshold - 0.01, -0.5, -3.0}) {
    capped = capped && tracking::orientation_weight(s, table) == table.cap;
  }
  for (double s = 0.0; s <= 2.0; s += 0.01) capped = capped && tracking::orientation_weight(s, table) <= table.cap;
  tracking::WeightParams steep = table;
  steep.alpha = 12.0;
  const double steep_threshold = steep.beta - std::log(steep.cap) / steep.alpha;
  for (double s = 0.0; s < steep_threshold; s += 0.005) capped = capped && tracking::orientation_weight(s, steep) == 15.0;
  capped = capped && tracking::orientation_weight(steep_threshold + 0.01, steep) < 15.0;
  ck.require(capped, "cap b = 15 below beta - ln(b)/alpha");
  ck.note("w(0) " + fmt("%.6f", w_zero));
  ck.note("cap threshold " + fmt("%.6f", threshold) + " (alpha 9), " + fmt("%.6f", steep_threshold) + " (alpha 12)");
  return ck.outcome();
}

Outcome enclosure() {
  Checks ck;
  double worst = -1.0;
  std::size_t refined = 0;
  for (auto shape : synth::kAllShapes) {
    const auto data = synth_dataset(shape, 4, 0.02);
    const auto model = canal::build_canal(data);
    double floor_z = model.directrix.front().z();
    for (const auto& p : model.directrix) floor_z = std::min(floor_z, p.z());
    const canal::SupportPlane plane{floor_z + 0.01, {}};
    const auto refined_model = canal::refine_cross_sections(model, std::span(&plane, 1));
    for (std::size_t s = 0; s < model.size(); ++s) refined += refined_model.frames[s] == model.frames[s] ? 0 : 1;
    for (const auto* m : {&model, &refined_model}) {
      for (const auto& d : data.demos) {
        for (std::size_t s = 0; s < m->size(); ++s) {
          worst = std::max(worst, (d.samples[s].p - m->directrix[s]).norm() - m->radii[s]);
        }
      }
    }
  }
  ck.require(worst <= 1e-9, "aligned demo points inside radius + 1e-9");
  ck.require(refined > 0, "refinement exercised");
  ck.note("max excess over radius " + fmt("%.2e", worst));
  ck.note(std::to_string(refined) + " refined cross-sections");
  return ck.outcome();
}

Outcome session_cycle() {
  Checks ck;
  const auto drive = [] {
    session::Session s(session_canal(), {});
    return server::scripted_drive(s, {}, 4200);
  };
  const auto log = drive();
  std::vector<std::string> legs;
  for (const auto& line : log) {
    const std::string phase = json::parse(line)["phase"];
    if (legs.empty() || legs.back() != phase) legs.push_back(phase);
  }
  const std::vector<std::string> period{"ToPick",  "AtPick",  "ToHomeFromPick",  "AtHome",
                                        "ToPlace", "AtPlace", "ToHomeFromPlace", "AtHome"};
  std::size_t cycles = 0;
  bool ordered = true;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    ordered = ordered && legs[i] == period[i % period.size()];
    if (ordered && i % period.size() == period.size() - 1) ++cycles;
  }
  ck.require(ordered, "phases follow home-pick-home-place-home");
  ck.require(cycles >= 10, "ten complete cycles");
  ck.require(drive() == log, "byte-identical logs across runs");
  ck.note(std::to_string(cycles) + " cycles in " + std::to_string(log.size()) + " ticks");
  return ck.outcome();
}

Vec3 vec(const json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()}; }

Outcome server_protocol() {
  Checks ck;
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t T = 10;
  const auto reference = drive_correction(12, T);

  server::ServerOptions options;
  options.port = 0;
  options.tick_hz = 50.0;
  server::Server srv(session::Session(session_canal(), {}), options);
  srv.start();
  std::vector<Vec3> wire_steps, ref_steps;
  {
    WsClient client(srv.port());
    const auto hello = client.read();
    const auto canal_frame = client.read();
    const auto state = client.read();
    ck.require(hello["kind"] == "hello" && canal_frame["kind"] == "canal" && state["kind"] == "state",
               "handshake order hello, canal, state");
    client.read_kind("state");
    client.send({{"kind", "command"}, {"payload", {{"type", "correction"}, {"kx", 1}, {"ky", 0}}}});
    json frame = client.read_kind("state");
    while (!frame["payload"]["correcting"].get<bool>()) frame = client.read_kind("state");
    const Vec3 first = vec(frame["payload"]["offset"]);
    const Vec3 x = vec(frame["payload"]["frame"]["x"]);
    const Vec3 y = vec(frame["payload"]["frame"]["y"]);
    for (std::size_t k = 1; k < T; ++k) {
      const Vec3 d = vec(client.read_kind("state")["payload"]["offset"]) - first;
      wire_steps.emplace_back(d.dot(x), d.dot(y), 0.0);
      const Vec3 r = reference.offsets[k] - reference.offsets[0];
      ref_steps.emplace_back(r.dot(reference.frame.x_axis), r.dot(reference.frame.y_axis), 0.0);
    }
  }
  srv.stop();
  srv.wait();
  double worst = 0.0;
  for (std::size_t k = 0; k < wire_steps.size(); ++k) worst = std::max(worst, (wire_steps[k] - ref_steps[k]).norm());
  const double elapsed = seconds_since(t0);
  ck.require(wire_steps.size() == T - 1 && worst <= 1e-9, "wire offsets match the scripted drive");
  ck.require(elapsed < 10.0, "runtime below 10 s");
  ck.note("max offset mismatch " + fmt("%.2e", worst) + " over " + std::to_string(wire_steps.size()) + " ticks");
  ck.note("runtime " + fmt("%.3f s", elapsed));
  return ck.outcome();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"frame validity", frame_validity},
      {"frame consistency", frame_consistency},
      {"correction x Slerp fidelity", slerp_fidelity},
      {"ratio rule", ratio_rule},
      {"backtracking round trip", backtracking},
      {"correction mapping", correction_mapping},
      {"orientation statistics", orientation_statistics},
      {"weight schedule", weight_schedule},
      {"enclosure", enclosure},
      {"session cycle", session_cycle},
      {"server protocol", server_protocol},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
