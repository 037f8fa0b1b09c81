#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/session.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geosacs::server {

inline constexpr int kProtocolVersion = 1;

// Wire frames are {"kind": K, "payload": P} JSON text messages.
std::string hello_frame(double tick_hz);
std::string canal_frame(const canal::CanalModel& canal);
std::string state_frame(const session::SessionState& state, const canal::CanalModel& canal);
std::string error_frame(std::string_view code, std::string_view detail);

nlohmann::json state_payload(const session::SessionState& state, const canal::CanalModel& canal);

/// Outcome of decoding one client frame. Undecodable JSON closes the
/// connection; an unknown kind or a bad command only earns an error frame.
struct ClientFrame {
  std::optional<session::Command> command;
  std::string error_code;  // empty on success
  std::string detail;
  bool close = false;
};

ClientFrame parse_client_frame(std::string_view text);

struct ScriptEntry {
  std::size_t tick = 0;
  session::Command command;
};

/// Drive a session headless for `total_ticks` ticks, injecting each entry at
/// its tick. Returns one JSON log line per tick. Entry ticks must be
/// non-decreasing.
std::vector<std::string> scripted_drive(session::Session& session, std::span<const ScriptEntry> script,
                                        std::size_t total_ticks);

/// Script file: one JSON object per line, {"tick": N, "command": {...}}.
std::vector<ScriptEntry> parse_script(std::istream& in);

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  double tick_hz = 20.0;
  std::optional<std::filesystem::path> log_path;
  bool handle_signals = false;  // stop on SIGINT/SIGTERM
};

/// WebSocket endpoint around one session. A single I/O thread runs both the
/// tick timer (the only code that touches the session) and the connection
/// handlers (which only enqueue commands).
class Server {
 public:
  Server(session::Session session, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listening socket and starts the tick loop. Throws Error{BindFailure}.
  void start();
  unsigned short port() const;
  /// Ticks executed so far.
  std::size_t ticks() const;
  void stop();
  /// Block until the server stops.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace geosacs::server
