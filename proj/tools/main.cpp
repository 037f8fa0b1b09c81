// geosacs command-line entry point.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include "geosacs/canal.hpp"
#include "geosacs/config.hpp"
#include "geosacs/error.hpp"
#include "geosacs/framing.hpp"
#include "geosacs/kernels.hpp"
#include "geosacs/repro.hpp"
#include "geosacs/server.hpp"
#include "geosacs/session.hpp"
#include "geosacs/synth.hpp"
#include "geosacs/tracking.hpp"
#include "geosacs/trajio.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace geosacs;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Constants shared by every subcommand. Each flag overrides the config file.
struct ConstantFlags {
  std::string config_path;
  std::optional<std::size_t> n_f;
  std::optional<double> r_min, epsilon, lambda, w_p, alpha, beta, b, delta, tick_hz;
  std::optional<std::size_t> window;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file; flags below override it")->check(CLI::ExistingFile);
    app.add_option("--nf", n_f, "N_f, disks per canal [default 200]");
    app.add_option("--r-min", r_min, "r_min, radius floor in metres [default 1e-4]");
    app.add_option("--epsilon", epsilon, "epsilon, Slerp degeneracy threshold on sin(theta) [default 1e-10]");
    app.add_option("--lambda", lambda, "lambda, ratio decay rate per disk [default 5e-4]");
    app.add_option("--w-p", w_p, "w_p, position weight [default 100]");
    app.add_option("--alpha", alpha, "alpha, orientation weight steepness [default 9]");
    app.add_option("--beta", beta, "beta, orientation spread pivot in radians [default 0.3]");
    app.add_option("--b", b, "b, orientation weight cap [default 15]");
    app.add_option("--delta", delta, "delta, correction sensitivity divisor [default 150]");
    app.add_option("--window", window, "y-axis stabilisation window in disks [default 10]");
    app.add_option("--hz", tick_hz, "control rate in Hz [default 20]");
  }

  config::Config resolve() const {
    config::Config c = config_path.empty() ? config::Config{} : config::load(config_path);
    if (n_f) c.n_f = *n_f;
    if (r_min) c.r_min = *r_min;
    if (epsilon) c.epsilon = *epsilon;
    if (lambda) c.lambda = *lambda;
    if (w_p) c.w_p = *w_p;
    if (alpha) c.alpha = *alpha;
    if (beta) c.beta = *beta;
    if (b) c.b = *b;
    if (delta) c.delta = *delta;
    if (window) c.window = *window;
    if (tick_hz) c.tick_hz = *tick_hz;
    c.validate();
    return c;
  }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

// Writes to the named file, or stdout when the path is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") file_ = open_out(path);
  }
  std::ostream& get() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string shape = "arc";
  synth::SynthParams params;
  std::string out_dir = ".";
};

int run_synth(const SynthArgs& a) {
  auto shape = synth::shape_from_string(a.shape);
  if (!shape) throw CLI::ValidationError("--shape", "unknown shape '" + a.shape + "'");
  synth::SynthParams p = a.params;
  p.shape = *shape;
  fs::create_directories(a.out_dir);
  for (const auto& demo : synth::generate(p)) {
    const fs::path path = fs::path(a.out_dir) / (demo.id + ".csv");
    auto out = open_out(path);
    trajio::write_demonstration(out, demo);
    std::cout << path.string() << '\n';
  }
  return 0;
}

// ---- build -----------------------------------------------------------------

struct BuildArgs {
  std::vector<std::string> demos;
  std::string out;
  ConstantFlags constants;
};

int run_build(const BuildArgs& a) {
  const config::Config cfg = a.constants.resolve();
  std::vector<fs::path> paths(a.demos.begin(), a.demos.end());
  const auto demos = trajio::load_demonstrations(paths);
  const auto data = trajio::preprocess(demos, cfg.n_f);
  const auto model = canal::build_canal(data, cfg.build_params());
  canal::save(model, a.out);

  const auto [rmin, rmax] = std::minmax_element(model.radii.begin(), model.radii.end());
  const double rmean = std::accumulate(model.radii.begin(), model.radii.end(), 0.0) / model.radii.size();
  const double smean = std::accumulate(model.sigma_q.begin(), model.sigma_q.end(), 0.0) / model.sigma_q.size();
  std::cout << "wrote " << a.out << '\n'
            << "N_f " << model.size() << '\n'
            << "demos " << demos.size() << '\n'
            << std::setprecision(6) << "radius min " << *rmin << " mean " << rmean << " max " << *rmax << '\n'
            << "mean sigma_q " << smean << '\n';
  return 0;
}

// ---- reproduce -------------------------------------------------------------

struct ReproduceArgs {
  std::string canal_path;
  std::string direction = "forward";
  std::string strategy;
  double eta0 = 0.0;
  std::optional<double> etaf;
  double phi = 0.0;
  std::string script;
  std::string out;
  ConstantFlags constants;
};

int run_reproduce(const ReproduceArgs& a) {
  const config::Config cfg = a.constants.resolve();
  const auto model = canal::load(a.canal_path);

  repro::RatioStrategy strategy;
  const std::string kind = a.strategy.empty() ? (a.etaf ? "decay" : "fixed") : a.strategy;
  strategy.kind = kind == "decay" ? repro::RatioKind::Decay : repro::RatioKind::Fixed;
  strategy.eta_0 = a.eta0;
  strategy.eta_f = a.etaf.value_or(0.0);
  strategy.lambda = cfg.lambda;

  std::map<std::size_t, std::vector<session::Command>> script;
  if (!a.script.empty()) {
    std::ifstream in(a.script);
    if (!in) throw Error(ErrorCode::Io, "cannot open script " + a.script);
    for (auto& entry : server::parse_script(in)) script[entry.tick].push_back(entry.command);
  }

  const bool backward = a.direction == "backward";
  const std::size_t start = backward ? model.size() - 1 : 0;
  auto state = repro::make_state_polar(model, start, a.eta0, a.phi,
                                       backward ? repro::Direction::Backward : repro::Direction::Forward);
  const auto weights = cfg.weight_params();
  const double dt = 1.0 / cfg.tick_hz;
  tracking::Pose pose{model.directrix[start] + state.offset, model.mean_q[start]};

  Sink sink(a.out);
  std::ostream& out = sink.get();
  out << "s,d,x,y,z,qw,qx,qy,qz,eta\n" << std::setprecision(17);
  for (std::size_t step = 0;; ++step) {
    if (auto it = script.find(step); it != script.end()) {
      bool corrected = false;
      for (const auto& cmd : it->second) {
        if (cmd.type != session::Command::Type::Correction) continue;
        state = repro::apply_correction(state, {cmd.kx, cmd.ky, cfg.delta}, model);
        corrected = true;
      }
      if (corrected) {
        strategy = repro::reseeded(strategy, state);
        state.leg_step = 0;
      }
    }
    const Vec3 target = model.directrix[state.s] + state.offset;
    pose = tracking::resolve_pose(pose, target, model.mean_q[state.s], state.s, weights, model, dt);
    out << state.s << ',' << state.d << ',' << pose.p.x() << ',' << pose.p.y() << ',' << pose.p.z() << ','
        << pose.q.w() << ',' << pose.q.x() << ',' << pose.q.y() << ',' << pose.q.z() << ',' << state.eta << '\n';
    if (!repro::can_step(state, model)) break;
    state = repro::step(state, model, strategy);
  }
  return 0;
}

// ---- frames ----------------------------------------------------------------

struct FramesArgs {
  std::string canal_path;
  std::string out;
};

int run_frames(const FramesArgs& a) {
  const auto model = canal::load(a.canal_path);
  const Vec3 x_g = model.frame_params.x_g;
  std::vector<Vec3> tangents;
  tangents.reserve(model.size());
  for (const auto& f : model.frames) tangents.push_back(f.e_t);
  const auto bishop = framing::bishop_frames(tangents, x_g);

  Sink sink(a.out);
  std::ostream& out = sink.get();
  out << "s,tx,ty,tz,xx,xy,xz,yx,yy,yz,right_handed,nx,ny,nz,bx,by,bz,"
         "angle_x_xg,angle_n_xg,twist_correction,twist_bishop\n"
      << std::setprecision(17);
  auto row = [&out](const Vec3& v) { out << v.x() << ',' << v.y() << ',' << v.z() << ','; };
  for (std::size_t s = 0; s < model.size(); ++s) {
    const auto& f = model.frames[s];
    const auto& bf = bishop[s];
    out << s << ',';
    row(f.e_t);
    row(f.x_axis);
    row(f.y_axis);
    out << (f.right_handed() ? 1 : 0) << ',';
    row(bf.normal);
    row(bf.binormal);
    double twist_c = 0.0;
    double twist_b = 0.0;
    if (s > 0) {
      // Measured on the right-handed completion so a y inversion reads as no twist.
      const auto& g = model.frames[s - 1];
      Mat3 cprev;
      Mat3 cnext;
      cprev << g.e_t, g.x_axis, g.e_t.cross(g.x_axis);
      cnext << f.e_t, f.x_axis, f.e_t.cross(f.x_axis);
      twist_c = framing::twist_about_tangent(cprev, cnext);
      Mat3 prev;
      Mat3 next;
      prev << bishop[s - 1].t, bishop[s - 1].normal, bishop[s - 1].binormal;
      next << bf.t, bf.normal, bf.binormal;
      twist_b = framing::twist_about_tangent(prev, next);
    }
    out << angle_between(f.x_axis, x_g) << ',' << angle_between(bf.normal, x_g) << ',' << twist_c << ','
        << twist_b << '\n';
  }
  return 0;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string canal_path;
  std::string bind = "127.0.0.1:8765";
  std::string log;
  bool auto_advance = false;
  ConstantFlags constants;
};

int run_serve(const ServeArgs& a) {
  const config::Config cfg = a.constants.resolve();
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected <addr:port>");
  server::ServerOptions opts;
  opts.address = a.bind.substr(0, colon);
  try {
    const int port = std::stoi(a.bind.substr(colon + 1));
    if (port < 0 || port > 65535) throw std::out_of_range("port");
    opts.port = static_cast<unsigned short>(port);
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--bind", "bad port in '" + a.bind + "'");
  }
  opts.tick_hz = cfg.tick_hz;
  if (!a.log.empty()) opts.log_path = a.log;
  opts.handle_signals = true;

  auto model = std::make_shared<const canal::CanalModel>(canal::load(a.canal_path));
  session::SessionConfig scfg = cfg.session_config();
  scfg.hold_at_ends = !a.auto_advance;
  server::Server srv(session::Session(model, scfg), opts);
  srv.start();
  std::cout << "listening on " << opts.address << ':' << srv.port() << std::endl;
  srv.wait();
  std::cout << "stopped after " << srv.ticks() << " ticks" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GeoSACS: canal-surface shared autonomy for demonstrated manipulation skills"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "geosacs 0.1.0");
  bool scalar_only = false;
  app.add_flag("--scalar", scalar_only, "disable SIMD distance kernels");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "write synthetic demonstration CSVs");
  synth_cmd->add_option("--shape", synth_args.shape, "line | arc | helix | ucurve | sine")->capture_default_str();
  synth_cmd->add_option("--demos", synth_args.params.n_demos, "number of demonstrations")->capture_default_str();
  synth_cmd->add_option("--samples", synth_args.params.samples, "nominal samples per demo")->capture_default_str();
  synth_cmd->add_option("--spread", synth_args.params.spread, "lateral offset scale (m)")->capture_default_str();
  synth_cmd->add_option("--noise", synth_args.params.noise, "per-sample noise (m)")->capture_default_str();
  synth_cmd->add_option("--tilt", synth_args.params.tilt_deg, "orientation tilt scale (deg)")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.params.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--out-dir", synth_args.out_dir, "output directory")->capture_default_str();

  BuildArgs build_args;
  auto* build_cmd = app.add_subcommand("build", "build a canal model from demonstration CSVs");
  build_cmd->add_option("demos", build_args.demos, "demonstration CSV files")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("-o,--out", build_args.out, "canal JSON output")->required();
  build_args.constants.attach(*build_cmd);

  ReproduceArgs repro_args;
  auto* repro_cmd = app.add_subcommand("reproduce", "traverse a canal and emit the pose trace as CSV");
  repro_cmd->add_option("--canal", repro_args.canal_path, "canal JSON")->required()->check(CLI::ExistingFile);
  repro_cmd->add_option("--direction", repro_args.direction, "forward | backward")
      ->check(CLI::IsMember({"forward", "backward"}))
      ->capture_default_str();
  repro_cmd->add_option("--strategy", repro_args.strategy, "fixed | decay (decay when --etaf is given)")
      ->check(CLI::IsMember({"fixed", "decay"}));
  repro_cmd->add_option("--eta0", repro_args.eta0, "initial ratio")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  repro_cmd->add_option("--etaf", repro_args.etaf, "final ratio for decay")->check(CLI::Range(0.0, 1.0));
  repro_cmd->add_option("--phi", repro_args.phi, "initial angle from x_s toward y_s (rad)")->capture_default_str();
  repro_cmd->add_option("--script", repro_args.script, "JSON-lines corrections {tick, command}")
      ->check(CLI::ExistingFile);
  repro_cmd->add_option("-o,--out", repro_args.out, "CSV output (stdout when omitted)");
  repro_args.constants.attach(*repro_cmd);

  FramesArgs frames_args;
  auto* frames_cmd = app.add_subcommand("frames", "dump correction and Bishop frames as CSV");
  frames_cmd->add_option("--canal", frames_args.canal_path, "canal JSON")->required()->check(CLI::ExistingFile);
  frames_cmd->add_option("-o,--out", frames_args.out, "CSV output (stdout when omitted)");

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "run the WebSocket session server");
  serve_cmd->add_option("--canal", serve_args.canal_path, "canal JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--bind", serve_args.bind, "<addr:port>; port 0 picks a free port")->capture_default_str();
  serve_cmd->add_option("--log", serve_args.log, "JSON-lines tick log");
  serve_cmd->add_flag("--auto-advance", serve_args.auto_advance, "leave pick and place without waiting for resume");
  serve_args.constants.attach(*serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (scalar_only) kernels::set_active_isa(kernels::Isa::Scalar);
  try {
    if (*synth_cmd) return run_synth(synth_args);
    if (*build_cmd) return run_build(build_args);
    if (*repro_cmd) return run_reproduce(repro_args);
    if (*frames_cmd) return run_frames(frames_args);
    if (*serve_cmd) return run_serve(serve_args);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
