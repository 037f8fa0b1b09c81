#include "geosacs/error.hpp"
#include "geosacs/server.hpp"

#include <nlohmann/json.hpp>

#include <istream>

namespace geosacs::server {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string frame(std::string_view kind, json payload) {
  return json{{"kind", kind}, {"payload", std::move(payload)}}.dump();
}

}  // namespace

std::string hello_frame(double tick_hz) {
  return frame("hello", {{"protocol_version", kProtocolVersion}, {"tick_hz", tick_hz}});
}

std::string canal_frame(const canal::CanalModel& canal) { return frame("canal", canal::to_json(canal)); }

json state_payload(const session::SessionState& state, const canal::CanalModel& canal) {
  const std::size_t s = state.repro.s;
  const auto& f = canal.frames[s];
  return {{"tick", state.tick},
          {"phase", std::string(session::to_string(state.phase))},
          {"s", s},
          {"d", state.repro.d},
          {"pose",
           {{"p", vec_json(state.pose.p)}, {"q", {state.pose.q.w(), state.pose.q.x(), state.pose.q.y(), state.pose.q.z()}}}},
          {"correcting", state.correcting},
          {"radius", canal.radii[s]},
          {"frame", {{"t", vec_json(f.e_t)}, {"x", vec_json(f.x_axis)}, {"y", vec_json(f.y_axis)}}},
          {"eta", state.repro.eta},
          {"offset", vec_json(state.repro.offset)},
          {"paused", state.paused}};
}

std::string state_frame(const session::SessionState& state, const canal::CanalModel& canal) {
  return frame("state", state_payload(state, canal));
}

std::string error_frame(std::string_view code, std::string_view detail) {
  return frame("error", {{"code", code}, {"detail", detail}});
}

ClientFrame parse_client_frame(std::string_view text) {
  ClientFrame out;
  json doc = json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    out.error_code = "MalformedFrame";
    out.detail = "expected a JSON object with a string 'kind'";
    out.close = true;
    return out;
  }
  const auto kind = doc["kind"].get<std::string>();
  if (kind != "command") {
    out.error_code = "UnknownKind";
    out.detail = "clients may only send 'command' frames, got '" + kind + "'";
    return out;
  }
  try {
    out.command = session::command_from_json(doc.value("payload", json::object()));
  } catch (const Error& e) {
    out.error_code = "InvalidCommand";
    out.detail = e.what();
  }
  return out;
}

std::vector<std::string> scripted_drive(session::Session& session, std::span<const ScriptEntry> script,
                                        std::size_t total_ticks) {
  for (std::size_t i = 1; i < script.size(); ++i) {
    if (script[i].tick < script[i - 1].tick) throw Error(ErrorCode::OutOfRange, "script ticks must be non-decreasing");
  }
  std::vector<std::string> log;
  log.reserve(total_ticks);
  std::size_t cursor = 0;
  std::vector<session::Command> pending;
  for (std::size_t t = 0; t < total_ticks; ++t) {
    pending.clear();
    while (cursor < script.size() && script[cursor].tick <= t) pending.push_back(script[cursor++].command);
    log.push_back(session::to_log_line(session.tick(pending)));
  }
  return log;
}

std::vector<ScriptEntry> parse_script(std::istream& in) {
  std::vector<ScriptEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("tick") || !doc["tick"].is_number_unsigned() ||
        !doc.contains("command")) {
      throw Error(ErrorCode::MalformedRow, "script line " + std::to_string(line_no) + " needs {tick, command}");
    }
    try {
      out.push_back({doc["tick"].get<std::size_t>(), session::command_from_json(doc["command"])});
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRow, "script line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace geosacs::server
