#include "geosacs/session.hpp"

#include "geosacs/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace geosacs::session {

using nlohmann::json;

namespace {

enum class Location { Home, Pick, Place };

Location destination(Phase leg) {
  switch (leg) {
    case Phase::ToPick: return Location::Pick;
    case Phase::ToPlace: return Location::Place;
    default: return Location::Home;
  }
}

Phase arrival_phase(Location loc) {
  switch (loc) {
    case Location::Pick: return Phase::AtPick;
    case Location::Place: return Phase::AtPlace;
    case Location::Home: return Phase::AtHome;
  }
  return Phase::AtHome;
}

Phase successor(Phase leg) {
  switch (leg) {
    case Phase::ToPick: return Phase::ToHomeFromPick;
    case Phase::ToHomeFromPick: return Phase::ToPlace;
    case Phase::ToPlace: return Phase::ToHomeFromPlace;
    case Phase::ToHomeFromPlace: return Phase::ToPick;
    default: return leg;
  }
}

Phase reversed(Phase leg) {
  switch (leg) {
    case Phase::ToPick: return Phase::ToHomeFromPick;
    case Phase::ToHomeFromPick: return Phase::ToPick;
    case Phase::ToPlace: return Phase::ToHomeFromPlace;
    case Phase::ToHomeFromPlace: return Phase::ToPlace;
    default: return leg;
  }
}

std::size_t index_of(const SessionState& st, Location loc) {
  switch (loc) {
    case Location::Pick: return st.pick;
    case Location::Place: return st.place;
    case Location::Home: return st.home;
  }
  return st.home;
}

void install_leg(SessionState& st, Phase leg, const SessionConfig& config) {
  st.phase = leg;
  const Location dest = destination(leg);
  st.target = index_of(st, dest);
  st.repro.direction = st.target < st.repro.s ? repro::Direction::Backward : repro::Direction::Forward;
  st.repro.leg_step = 0;

  repro::RatioStrategy strategy;
  strategy.eta_0 = st.repro.eta;
  if (dest == Location::Home) {
    strategy.kind = repro::RatioKind::Decay;
    strategy.eta_f = 0.0;
    strategy.lambda = config.lambda;
    if (config.home_residual) {
      const std::size_t span = st.target > st.repro.s ? st.target - st.repro.s : st.repro.s - st.target;
      strategy.lambda = repro::lambda_for_leg(std::max<std::size_t>(2, span + 1), *config.home_residual);
    }
  } else {
    strategy.kind = repro::RatioKind::Fixed;
  }
  st.strategy_now = strategy;
}

void arrive(SessionState& st, const SessionConfig& config) {
  const Location dest = destination(st.phase);
  st.next_phase = successor(st.phase);
  st.phase = arrival_phase(dest);
  st.dwell_remaining = dest == Location::Home ? 0 : config.dwell_ticks;
  st.released = false;
}

bool at_end_location(Phase phase) { return phase == Phase::AtPick || phase == Phase::AtPlace; }

// Returns true when the command was accepted.
bool apply_command(SessionState& st, const Command& cmd, const SessionConfig& config) {
  switch (cmd.type) {
    case Command::Type::Correction:
      if (!std::isfinite(cmd.kx) || !std::isfinite(cmd.ky) || std::abs(cmd.kx) > 1.0 || std::abs(cmd.ky) > 1.0) {
        return false;
      }
      st.correcting = true;
      st.input = {cmd.kx, cmd.ky, config.delta};
      return true;
    case Command::Type::CorrectionEnd:
      if (!st.correcting) return false;
      st.correcting = false;
      st.input = {0.0, 0.0, config.delta};
      return true;
    case Command::Type::Backtrack: {
      if (!is_leg(st.phase)) return false;
      install_leg(st, reversed(st.phase), config);
      return true;
    }
    case Command::Type::Pause:
      if (st.paused) return false;
      st.paused = true;
      return true;
    case Command::Type::Resume:
      if (st.paused) {
        st.paused = false;
        return true;
      }
      if (at_end_location(st.phase)) {
        st.released = true;
        return true;
      }
      return false;
    case Command::Type::SetSpeed:
      if (cmd.speed < 1) return false;
      st.speed = cmd.speed;
      return true;
    case Command::Type::GripToggle:
      if (at_end_location(st.phase)) st.released = true;
      return true;
  }
  return false;
}

void advance_leg(SessionState& st, const canal::CanalModel& canal, const SessionConfig& config) {
  for (long i = 0; i < st.speed; ++i) {
    if (st.repro.s == st.target) {
      arrive(st, config);
      return;
    }
    st.repro = repro::step(st.repro, canal, st.strategy_now);
    if (st.repro.s == st.target) {
      arrive(st, config);
      return;
    }
  }
}

void advance(SessionState& st, const canal::CanalModel& canal, const SessionConfig& config) {
  if (!is_leg(st.phase)) {
    if (at_end_location(st.phase) && config.hold_at_ends && !st.released) return;
    if (st.dwell_remaining > 0) {
      --st.dwell_remaining;
      return;
    }
    install_leg(st, st.next_phase, config);
  }
  advance_leg(st, canal, config);
}

json pose_json(const tracking::Pose& pose) {
  return {{"p", {pose.p.x(), pose.p.y(), pose.p.z()}}, {"q", {pose.q.w(), pose.q.x(), pose.q.y(), pose.q.z()}}};
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::ToPick: return "ToPick";
    case Phase::AtPick: return "AtPick";
    case Phase::ToHomeFromPick: return "ToHomeFromPick";
    case Phase::AtHome: return "AtHome";
    case Phase::ToPlace: return "ToPlace";
    case Phase::AtPlace: return "AtPlace";
    case Phase::ToHomeFromPlace: return "ToHomeFromPlace";
  }
  return "Unknown";
}

bool is_leg(Phase phase) {
  return phase == Phase::ToPick || phase == Phase::ToHomeFromPick || phase == Phase::ToPlace ||
         phase == Phase::ToHomeFromPlace;
}

json to_json(const Command& cmd) {
  switch (cmd.type) {
    case Command::Type::Correction: return {{"type", "correction"}, {"kx", cmd.kx}, {"ky", cmd.ky}};
    case Command::Type::CorrectionEnd: return {{"type", "correction_end"}};
    case Command::Type::Backtrack: return {{"type", "backtrack"}};
    case Command::Type::Pause: return {{"type", "pause"}};
    case Command::Type::Resume: return {{"type", "resume"}};
    case Command::Type::SetSpeed: return {{"type", "set_speed"}, {"v", cmd.speed}};
    case Command::Type::GripToggle: return {{"type", "grip"}};
  }
  return {};
}

Command command_from_json(const json& payload) {
  if (!payload.is_object() || !payload.contains("type") || !payload["type"].is_string()) {
    throw Error(ErrorCode::MalformedFrame, "command payload needs a string 'type'");
  }
  const auto type = payload["type"].get<std::string>();
  const auto number = [&](const char* key) {
    if (!payload.contains(key) || !payload[key].is_number()) {
      throw Error(ErrorCode::MalformedFrame, std::string("command '") + type + "' needs numeric '" + key + "'");
    }
    return payload[key].get<double>();
  };
  if (type == "correction") {
    const double kx = number("kx");
    const double ky = number("ky");
    if (std::abs(kx) > 1.0 || std::abs(ky) > 1.0) {
      throw Error(ErrorCode::MalformedFrame, "correction magnitudes must lie in [-1, 1]");
    }
    return Command::correction(kx, ky);
  }
  if (type == "correction_end") return Command::correction_end();
  if (type == "backtrack") return Command::backtrack();
  if (type == "pause") return Command::pause();
  if (type == "resume") return Command::resume();
  if (type == "grip") return Command::grip();
  if (type == "set_speed") {
    const double v = number("v");
    if (v < 1.0 || v != std::floor(v)) throw Error(ErrorCode::MalformedFrame, "set_speed needs an integer v >= 1");
    return Command::set_speed(static_cast<long>(v));
  }
  throw Error(ErrorCode::MalformedFrame, "unknown command type '" + type + "'");
}

SessionState seed_session(const canal::CanalModel& canal, std::size_t pick, std::size_t place, std::size_t home,
                          const SessionConfig& config) {
  const std::size_t n = canal.size();
  if (pick >= n || place >= n || home >= n) throw Error(ErrorCode::OutOfRange, "pick/place/home index out of range");
  SessionState st;
  st.pick = pick;
  st.place = place;
  st.home = home;
  st.tick_hz = config.tick_hz;
  st.input.delta = config.delta;
  st.repro = repro::make_state(canal, home, Vec3::Zero());
  st.pose = {canal.directrix[home], canal.mean_q[home]};
  install_leg(st, Phase::ToPick, config);
  return st;
}

SessionState seed_session(const canal::CanalModel& canal, const SessionConfig& config) {
  const std::size_t n = canal.size();
  if (n == 0) throw Error(ErrorCode::OutOfRange, "empty canal");
  return seed_session(canal, config.pick.value_or(0), config.place.value_or(n - 1),
                      config.home.value_or(repro::param_to_index(0.0, n)), config);
}

TickResult tick(const SessionState& state, const canal::CanalModel& canal, const SessionConfig& config,
                std::span<const Command> pending) {
  TickResult out{state, state.pose, {}};
  SessionState& st = out.state;
  TickRecord& rec = out.record;
  rec.tick = state.tick;

  for (const Command& cmd : pending) {
    (apply_command(st, cmd, config) ? rec.applied : rec.dropped).push_back(cmd);
  }

  if (st.paused) {
    // hold position
  } else if (st.correcting) {
    st.repro = repro::apply_correction(st.repro, st.input, canal);
    st.strategy_now = repro::reseeded(st.strategy_now, st.repro);
    st.repro.leg_step = 0;
  } else {
    advance(st, canal, config);
  }

  const std::size_t s = st.repro.s;
  st.pose = tracking::resolve_pose(st.pose, canal.directrix[s] + st.repro.offset, canal.mean_q[s], canal.sigma_q[s],
                                   config.weights, 1.0 / st.tick_hz);
  st.tick = state.tick + 1;

  out.pose = st.pose;
  rec.phase = st.phase;
  rec.s = s;
  rec.d = st.repro.d;
  rec.eta = st.repro.eta;
  rec.pose = st.pose;
  rec.correcting = st.correcting;
  return out;
}

json to_json(const TickRecord& record) {
  json applied = json::array();
  for (const auto& c : record.applied) applied.push_back(to_json(c));
  json doc = {{"tick", record.tick},
              {"phase", std::string(to_string(record.phase))},
              {"s", record.s},
              {"d", record.d},
              {"eta", record.eta},
              {"pose", pose_json(record.pose)},
              {"correcting", record.correcting},
              {"commands_applied", std::move(applied)}};
  if (!record.dropped.empty()) {
    json dropped = json::array();
    for (const auto& c : record.dropped) dropped.push_back(to_json(c));
    doc["commands_dropped"] = std::move(dropped);
  }
  return doc;
}

std::string to_log_line(const TickRecord& record) { return to_json(record).dump(); }

void CommandQueue::push(Command cmd) {
  std::lock_guard lock(mu_);
  items_.push_back(cmd);
}

std::vector<Command> CommandQueue::drain() {
  std::lock_guard lock(mu_);
  std::vector<Command> out(items_.begin(), items_.end());
  items_.clear();
  return out;
}

Session::Session(std::shared_ptr<const canal::CanalModel> canal, SessionConfig config)
    : canal_(std::move(canal)), config_(std::move(config)), state_(seed_session(*canal_, config_)) {}

TickRecord Session::tick(std::span<const Command> pending) {
  auto result = session::tick(state_, *canal_, config_, pending);
  state_ = std::move(result.state);
  return std::move(result.record);
}

}  // namespace geosacs::session
