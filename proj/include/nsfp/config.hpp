#pragma once

#include <map>
#include <string>
#include <vector>

#include "nsfp/params.hpp"

namespace nsfp {

struct RunConfig {
  Params params;
  bool polymer = true; // false: fluid-only runs
  std::string init_recipe = "balanced";
  double init_amplitude = 0.1;

  int nx = 32;
  int q_radial = 24;
  int q_angular = 16;

  double final_time = 0.5;
  double dt_safety = 0.5;
  int samples = 100;

  std::vector<double> epsilon_list;
  int tracked_modes = 4;
  bool reference = true;

  std::string output_dir = "out";
  int field_stride = 0; // in samples; 0 disables field dumps
  std::vector<std::string> fields{"rho", "ux", "uy", "rho_p"};

  /// Effective configuration in the input format.
  std::string echo() const;
};

/// Parses the sectioned key = value format. Throws on unknown, missing or
/// duplicate keys and on values that fail validation.
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config(const std::string& path);

} // namespace nsfp
