#pragma once

#include "geosacs/canal.hpp"
#include "geosacs/session.hpp"
#include "geosacs/tracking.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace geosacs::config {

// Pipeline constants. Defaults reproduce the published implementation values.
struct Config {
  std::size_t n_f = trajio::kDefaultNf;
  double r_min = canal::kDefaultRMin;
  double epsilon = 1e-10;
  double lambda = 5e-4;
  double w_p = 100.0;
  double alpha = 9.0;
  double beta = 0.3;
  double b = 15.0;
  double delta = 150.0;
  std::size_t window = 10;
  double tick_hz = 20.0;
  std::vector<canal::SupportPlane> support_planes;

  /// Throws Error{MalformedConfig} when a constant is out of range.
  void validate() const;

  canal::BuildParams build_params() const;
  tracking::WeightParams weight_params() const;
  session::SessionConfig session_config() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
Config from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Config& config);
Config load(const std::filesystem::path& path);

}  // namespace geosacs::config
