#pragma once

// Run configuration: a flat `key = value` text file. Blank lines and text
// after '#' are ignored; unknown keys are errors. Paths are relative to the
// directory holding the config file.
//
//   grid, regions, demand, heat, end_use_shares, supply_use, out
//   scenarios          comma list (current, efficiency, heat_pump, heat_pump_efficiency, flat)
//   hours              peak | peak_day | extreme_days | comma list of hour-of-year indices
//   orderings, fractions, seed, shed_step, interconnector_penalty, impedance_distance, workers
//   hp_penetration, hp_cop, efficiency.<end_use>
//   headroom
//   overcapacity, rationing_penalty, trade_cost, allow_trade
//   analysis_fraction

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gridrisk/demand.hpp"
#include "gridrisk/failure_sim.hpp"
#include "gridrisk/mria.hpp"

namespace gridrisk {

struct RunConfig {
  std::filesystem::path grid_file, regions_file, profile_file, heat_file, shares_file, supply_use_dir;
  std::filesystem::path out_dir = "out";
  std::vector<ScenarioKind> scenarios{std::begin(kAllScenarios), std::end(kAllScenarios)};
  std::string hours = "peak";
  ExperimentConfig experiment;  // hours are filled in from `hours` at run time
  ScenarioSpec scenario;
  CalibrationOptions calibration;
  double overcapacity = 0.025;
  MriaOptions mria;
  double analysis_fraction = 0.4;

  void validate() const;  // throws ValidationError
};

// Relative paths are resolved against base_dir.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                       const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
// Paths are written as stored.
std::string config_to_text(const RunConfig& config);

}  // namespace gridrisk
