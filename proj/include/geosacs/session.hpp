#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/repro.hpp"
#include "geosacs/tracking.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geosacs::session {

// The cycle is home -> pick -> home -> place -> home. To* phases are legs,
// At* phases are arrivals.
enum class Phase { ToPick, AtPick, ToHomeFromPick, AtHome, ToPlace, AtPlace, ToHomeFromPlace };

std::string_view to_string(Phase phase);
bool is_leg(Phase phase);

struct Command {
  enum class Type { Correction, CorrectionEnd, Backtrack, Pause, Resume, SetSpeed, GripToggle };

  Type type = Type::Pause;
  double kx = 0.0;
  double ky = 0.0;
  long speed = 1;  // disks per tick, SetSpeed only

  static Command correction(double kx, double ky) { return {Type::Correction, kx, ky, 1}; }
  static Command correction_end() { return {Type::CorrectionEnd}; }
  static Command backtrack() { return {Type::Backtrack}; }
  static Command pause() { return {Type::Pause}; }
  static Command resume() { return {Type::Resume}; }
  static Command set_speed(long v) { return {Type::SetSpeed, 0.0, 0.0, v}; }
  static Command grip() { return {Type::GripToggle}; }

  bool operator==(const Command&) const = default;
};

/// Wire form: {"type":"correction","kx":..,"ky":..} | {"type":"correction_end"} | ...
nlohmann::json to_json(const Command& cmd);
/// Throws Error{MalformedFrame} on an unknown type or bad fields.
Command command_from_json(const nlohmann::json& payload);

struct SessionConfig {
  // Disk indices (0-based); defaults are first disk, last disk and d = 0.
  std::optional<std::size_t> pick;
  std::optional<std::size_t> place;
  std::optional<std::size_t> home;
  double tick_hz = 20.0;
  double delta = 150.0;
  double lambda = 5e-4;
  // When set, each home-bound leg uses lambda_for_leg(leg disks, home_residual).
  std::optional<double> home_residual;
  tracking::WeightParams weights;
  // Wait for Resume/GripToggle at pick and place.
  bool hold_at_ends = false;
  // Extra ticks spent at pick and place before moving on.
  std::size_t dwell_ticks = 0;
};

struct SessionState {
  Phase phase = Phase::ToPick;
  Phase next_phase = Phase::ToHomeFromPick;
  repro::ReproState repro;
  tracking::Pose pose;
  bool correcting = false;
  repro::CorrectionInput input;
  repro::RatioStrategy strategy_now;
  double tick_hz = 20.0;
  bool paused = false;
  std::size_t tick = 0;
  std::size_t target = 0;
  long speed = 1;
  std::size_t dwell_remaining = 0;
  bool released = false;
  std::size_t pick = 0;
  std::size_t place = 0;
  std::size_t home = 0;
};

struct TickRecord {
  std::size_t tick = 0;
  Phase phase = Phase::ToPick;
  std::size_t s = 0;
  double d = 0.0;
  double eta = 0.0;
  tracking::Pose pose;
  bool correcting = false;
  std::vector<Command> applied;
  std::vector<Command> dropped;
};

struct TickResult {
  SessionState state;
  tracking::Pose pose;
  TickRecord record;
};

/// Session at home, heading for pick, on the directrix.
SessionState seed_session(const canal::CanalModel& canal, std::size_t pick, std::size_t place, std::size_t home,
                          const SessionConfig& config = {});

/// Seeds from the config's indices (or their defaults).
SessionState seed_session(const canal::CanalModel& canal, const SessionConfig& config);

/// One control period: apply pending commands in order, then either a
/// correction on the frozen disk or the autonomous step(s).
TickResult tick(const SessionState& state, const canal::CanalModel& canal, const SessionConfig& config,
                std::span<const Command> pending);

nlohmann::json to_json(const TickRecord& record);
std::string to_log_line(const TickRecord& record);

/// Multi-producer command inbox drained by the tick owner.
class CommandQueue {
 public:
  void push(Command cmd);
  std::vector<Command> drain();

 private:
  std::mutex mu_;
  std::deque<Command> items_;
};

/// Owns one canal and one evolving state.
class Session {
 public:
  Session(std::shared_ptr<const canal::CanalModel> canal, SessionConfig config);

  TickRecord tick(std::span<const Command> pending);

  const SessionState& state() const { return state_; }
  const canal::CanalModel& canal() const { return *canal_; }
  std::shared_ptr<const canal::CanalModel> canal_ptr() const { return canal_; }
  const SessionConfig& config() const { return config_; }

 private:
  std::shared_ptr<const canal::CanalModel> canal_;
  SessionConfig config_;
  SessionState state_;
};

}  // namespace geosacs::session
