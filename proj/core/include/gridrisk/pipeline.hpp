#pragma once

// End-to-end orchestration: inputs -> calibrated sweep -> economic costs ->
// analysis tables. Every output is a pure function of the inputs and config.

#include <filesystem>
#include <string>
#include <vector>

#include "gridrisk/analysis.hpp"
#include "gridrisk/config.hpp"
#include "gridrisk/failure_sim.hpp"
#include "gridrisk/mria.hpp"

namespace gridrisk {

struct Inputs {
  Grid grid{{}, {}, {}};
  RegionTable regions;
  DemandProfile current;
  DemandProfile heat;
  EndUseShares shares;
  SupplyUseModel economy;  // empty when the config names no supply-use tables
};

Inputs load_inputs(const RunConfig& config);

// One full-year profile per configured scenario, keyed by scenario name.
ProfileSet build_profiles(const Inputs& inputs, const RunConfig& config);

// peak: each scenario's national peak hour; peak_day: the 24 hours of that
// day; extreme_days: peak and minimum days; or an explicit hour list applied
// to every scenario. Sorted by (scenario, hour).
std::vector<HourSpec> select_hours(const ProfileSet& profiles, const std::string& mode);

struct Simulation {
  Grid calibrated{{}, {}, {}};
  ResultTable results;
};

// Calibrates ratings on every scenario's profile, then runs the sweep.
Simulation simulate(const Inputs& inputs, const ProfileSet& profiles, const RunConfig& config);

// Per-record cost: uniform regional shock from unserved demand, then the
// impact LP. Identical shocks are solved once; distinct shocks run on
// config workers.
RecordCosts assess_records(const ResultTable& results, const Inputs& inputs, const ProfileSet& profiles,
                           const RunConfig& config);

struct AnalysisTables {
  std::string cost_curve, marginal, marginal_by_loss, population_share, thresholds;
  std::vector<std::pair<std::string, std::string>> regional_change;  // scenario -> CSV
};

AnalysisTables analyze(const ResultTable& results, const RecordCosts& costs, const Inputs& inputs,
                       const ProfileSet& profiles, const RunConfig& config);

// File writers for the three stages; each returns the paths written.
std::vector<std::filesystem::path> write_simulation(const Simulation& sim, const RunConfig& config);
std::vector<std::filesystem::path> write_costs(const RecordCosts& costs, const RunConfig& config);
std::vector<std::filesystem::path> write_analysis(const AnalysisTables& tables, const RunConfig& config);

// Config echo (without the worker count), seed and FNV-1a digests of every input.
std::string provenance(const RunConfig& config);

}  // namespace gridrisk
