#include "geosacs/config.hpp"

#include "geosacs/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace geosacs::config {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::MalformedConfig, what);
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  const json& v = doc.at(key);
  if constexpr (std::is_same_v<T, std::size_t>) {
    require(v.is_number_unsigned(), std::string(key) + " must be a non-negative integer");
  } else {
    require(v.is_number(), std::string(key) + " must be a number");
  }
  out = v.get<T>();
}

}  // namespace

void Config::validate() const {
  require(n_f >= 2, "N_f must be at least 2");
  require(std::isfinite(r_min) && r_min > 0.0, "r_min must be positive");
  require(std::isfinite(epsilon) && epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be non-negative");
  require(std::isfinite(w_p) && w_p > 0.0, "w_p must be positive");
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be non-negative");
  require(std::isfinite(beta), "beta must be finite");
  require(std::isfinite(b) && b > 0.0, "b must be positive");
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(window >= 1, "window must be at least 1");
  require(std::isfinite(tick_hz) && tick_hz > 0.0 && tick_hz <= 1000.0, "tick_hz must lie in (0, 1000]");
  for (const auto& plane : support_planes) {
    require(std::isfinite(plane.z_floor), "support plane z_floor must be finite");
    for (const auto& range : plane.ranges) {
      require(range.first <= range.last, "support plane range must have first <= last");
      require(range.last < n_f, "support plane range exceeds N_f");
    }
  }
}

canal::BuildParams Config::build_params() const {
  canal::BuildParams p;
  p.r_min = r_min;
  p.frame_params.epsilon = epsilon;
  p.frame_params.window = window;
  p.support_planes = support_planes;
  return p;
}

tracking::WeightParams Config::weight_params() const { return {alpha, beta, b, w_p}; }

session::SessionConfig Config::session_config() const {
  session::SessionConfig s;
  s.tick_hz = tick_hz;
  s.delta = delta;
  s.lambda = lambda;
  s.weights = weight_params();
  return s;
}

Config from_json(const json& doc) {
  require(doc.is_object(), "config must be a JSON object");
  static const std::set<std::string> known = {"N_f",   "r_min", "epsilon", "lambda", "w_p",     "alpha",
                                              "beta",  "b",     "delta",   "window", "tick_hz", "support_planes"};
  for (const auto& [key, _] : doc.items()) require(known.contains(key), "unknown config key '" + key + "'");

  Config c;
  read(doc, "N_f", c.n_f);
  read(doc, "r_min", c.r_min);
  read(doc, "epsilon", c.epsilon);
  read(doc, "lambda", c.lambda);
  read(doc, "w_p", c.w_p);
  read(doc, "alpha", c.alpha);
  read(doc, "beta", c.beta);
  read(doc, "b", c.b);
  read(doc, "delta", c.delta);
  read(doc, "window", c.window);
  read(doc, "tick_hz", c.tick_hz);
  if (doc.contains("support_planes")) {
    const json& planes = doc.at("support_planes");
    require(planes.is_array(), "support_planes must be an array");
    for (const json& p : planes) {
      require(p.is_object() && p.contains("z_floor") && p.at("z_floor").is_number(),
              "each support plane needs a numeric z_floor");
      canal::SupportPlane plane;
      plane.z_floor = p.at("z_floor").get<double>();
      if (p.contains("ranges")) {
        require(p.at("ranges").is_array(), "support plane ranges must be an array");
        for (const json& r : p.at("ranges")) {
          require(r.is_array() && r.size() == 2 && r[0].is_number_unsigned() && r[1].is_number_unsigned(),
                  "support plane range must be [first, last]");
          plane.ranges.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>()});
        }
      }
      c.support_planes.push_back(std::move(plane));
    }
  }
  c.validate();
  return c;
}

json to_json(const Config& c) {
  json planes = json::array();
  for (const auto& plane : c.support_planes) {
    json ranges = json::array();
    for (const auto& r : plane.ranges) ranges.push_back({r.first, r.last});
    planes.push_back({{"z_floor", plane.z_floor}, {"ranges", ranges}});
  }
  return {{"N_f", c.n_f},         {"r_min", c.r_min}, {"epsilon", c.epsilon}, {"lambda", c.lambda},
          {"w_p", c.w_p},         {"alpha", c.alpha}, {"beta", c.beta},       {"b", c.b},
          {"delta", c.delta},     {"window", c.window}, {"tick_hz", c.tick_hz}, {"support_planes", planes}};
}

Config load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  json doc = json::parse(in, nullptr, false);
  require(!doc.is_discarded(), path.string() + " is not valid JSON");
  return from_json(doc);
}

}  // namespace geosacs::config
