#pragma once

// Monte Carlo generation-loss sweep: random removal orderings, stepped
// capacity-loss fractions, dispatch with shedding, unserved MW per region.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gridrisk/demand.hpp"
#include "gridrisk/dispatch.hpp"
#include "gridrisk/grid.hpp"

namespace gridrisk {

// 0.00, 0.05, ..., 0.45
std::vector<double> default_loss_fractions();

struct HourSpec {
  std::string scenario;
  int hour = 0;  // hour-of-year
  bool operator==(const HourSpec&) const = default;
};

struct ExperimentConfig {
  std::size_t n_orderings = 1000;
  std::vector<double> loss_fractions = default_loss_fractions();
  std::vector<HourSpec> hours;
  std::uint64_t master_seed = 0;
  double shed_step = 0.1;
  double interconnector_penalty = 10.0;
  bool impedance_weighted = false;
  std::size_t workers = 1;

  void validate() const;  // throws ValidationError
};

enum class RecordStatus { feasible, shed, unstable };
std::string_view to_string(RecordStatus status);
RecordStatus parse_record_status(std::string_view text);

struct ScenarioRecord {
  std::size_t ordering_index = 0;
  double loss_fraction = 0.0;
  std::string scenario;
  int hour = 0;
  std::vector<double> unserved_mw_per_region;  // ResultTable::regions order
  double total_unserved_mw = 0.0;
  RecordStatus status = RecordStatus::feasible;
  bool operator==(const ScenarioRecord&) const = default;
};

struct ResultTable {
  std::vector<std::string> regions;
  std::vector<ScenarioRecord> records;  // sorted by (ordering, fraction, scenario, hour)
  bool operator==(const ResultTable&) const = default;
};

using Ordering = std::vector<std::size_t>;  // generator indices

// Orderings cover the non-international generators. Ordering i is a
// Fisher-Yates shuffle of them (in file order) driven by mt19937_64 seeded
// with derive_seed(master_seed, i).
Ordering generate_ordering(const Grid& grid, std::uint64_t master_seed, std::size_t index);
std::vector<Ordering> generate_orderings(const Grid& grid, std::size_t n, std::uint64_t master_seed);

// Shortest prefix whose cumulative derated capacity reaches fraction x the
// total non-international derated capacity.
std::vector<std::size_t> removal_set(const Ordering& ordering, const Grid& grid, double fraction);

// Profiles keyed by scenario name; each must contain the hours it is asked for.
using ProfileSet = std::map<std::string, DemandProfile>;

ResultTable run_experiment(const Grid& grid, const ProfileSet& profiles, const ExperimentConfig& config);

struct CalibrationOptions {
  double headroom_factor = 1.2;
  double interconnector_penalty = 10.0;
  bool impedance_weighted = false;
};

// Raises each branch rating to headroom x the largest |flow| it carries in
// zero-removal, solar-excluded, uncapacitated dispatch at each profile's
// national peak hour (never lowering a rating).
Grid calibrate_ratings(const Grid& grid, const std::vector<DemandProfile>& profiles,
                       const CalibrationOptions& options = {});
Grid calibrate_ratings(const Grid& grid, const DemandProfile& current_profile, const CalibrationOptions& options = {});

// Generators that are never available (solar at the studied dark hours).
std::vector<std::size_t> solar_generators(const Grid& grid);

// One dispatch as the experiment runs it: removal set plus solar unavailable.
DispatchSolution dispatch_hour(const Dispatcher& dispatcher, const DemandProfile& profile, std::size_t hour_position,
                               std::span<const std::size_t> removed, double interconnector_penalty);

// CSV: ordering,fraction,scenario,hour,region,unserved_mw,status (one row per record and region).
std::string results_to_csv(const ResultTable& table);
ResultTable parse_results(std::string_view text, const std::string& source = "<results>");
ResultTable load_results(const std::filesystem::path& path);

}  // namespace gridrisk
