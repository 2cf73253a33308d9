#pragma once

// Hourly regional demand profiles and the scenario transforms applied to them.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gridrisk/grid.hpp"

namespace gridrisk {

inline constexpr int kHoursPerYear = 8760;
inline constexpr int kDaysPerYear = 365;

enum class ScenarioKind { current, efficiency, heat_pump, heat_pump_efficiency, flat };
inline constexpr ScenarioKind kAllScenarios[] = {ScenarioKind::current, ScenarioKind::efficiency,
                                                 ScenarioKind::heat_pump, ScenarioKind::heat_pump_efficiency,
                                                 ScenarioKind::flat};
std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario(std::string_view text);

// End uses recognised for efficiency factors. Unlisted uses in a share table
// are allowed and default to factor 1.
inline constexpr std::string_view kEndUses[] = {"space_heating", "water_heating", "lighting", "cold",
                                                "cooking", "wet", "cooling_humidification", "high_temperature_process"};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::current;
  double hp_penetration = 0.20;
  double hp_cop = 3.0;
  std::map<std::string, double> efficiency_factors;  // end use -> factor in (0, 1]

  double factor(std::string_view end_use) const;
  // Mean factor of the space and water heating end uses; scales heat demand
  // in the combined scenario.
  double heating_factor() const;
  void validate() const;  // throws ValidationError
};

// Region-major MW table on a shared hour axis (hour-of-year indices).
struct DemandProfile {
  std::string scenario;
  std::vector<std::string> regions;
  std::vector<int> hours;
  std::vector<double> demand_mw;  // [region * hours.size() + hour position]

  DemandProfile() = default;
  DemandProfile(std::string scenario, std::vector<std::string> regions, std::vector<int> hours);

  std::size_t hour_count() const noexcept { return hours.size(); }
  double& at(std::size_t region, std::size_t hour) { return demand_mw[region * hours.size() + hour]; }
  double at(std::size_t region, std::size_t hour) const { return demand_mw[region * hours.size() + hour]; }
  std::size_t region_index(std::string_view id) const;  // throws ValidationError
  std::size_t hour_position(int hour_of_year) const;     // throws ValidationError

  std::vector<double> national() const;  // per hour
  double region_energy_mwh(std::size_t region) const;
  bool is_full_year() const;
  void validate() const;
  bool operator==(const DemandProfile&) const = default;
};

// region -> end use -> share
using EndUseShares = std::map<std::string, std::map<std::string, double>>;

struct ShapeParams {
  int peak_day = 15;  // day-of-year of the seasonal maximum
  double seasonal_amplitude = 0.22;
  // Relative level by hour of day: evening maximum at 19, overnight minimum at 3.
  std::array<double, 24> diurnal = {0.66, 0.635, 0.62, 0.60, 0.615, 0.64, 0.72, 0.84, 0.90, 0.90, 0.89, 0.88,
                                    0.87, 0.86, 0.86, 0.87, 0.90, 0.95, 0.985, 1.00, 0.97, 0.91, 0.82, 0.73};
  double noise = 0.01;  // uniform multiplicative noise half-width
};

struct HeatShapeParams {
  int peak_day = 15;
  double seasonal_amplitude = 0.75;
  std::array<double, 24> diurnal = {0.30, 0.28, 0.27, 0.27, 0.30, 0.45, 0.75, 0.90, 0.80, 0.62, 0.55, 0.50,
                                    0.48, 0.47, 0.48, 0.52, 0.62, 0.78, 0.92, 1.00, 0.90, 0.72, 0.52, 0.38};
  double noise = 0.01;
  double heat_to_electric = 1.0;  // annual thermal energy per unit of annual electric energy
};

// Full-year electric profile per region preserving each region's annual_gwh.
DemandProfile synthesize_current(const RegionTable& regions, const ShapeParams& params, std::uint64_t seed);
// Full-year thermal heat demand (MW th) per region.
DemandProfile synthesize_heat(const RegionTable& regions, const HeatShapeParams& params, std::uint64_t seed);

// demand + penetration * heat / cop. Throws MisalignedHours if the tables differ in regions or hours.
DemandProfile apply_heat_pump(const DemandProfile& profile, const ScenarioSpec& spec, const DemandProfile& heat);
// demand * sum_u share_u * factor_u per region. Throws SharesNotNormalized.
DemandProfile apply_efficiency(const DemandProfile& profile, const ScenarioSpec& spec, const EndUseShares& shares);
// Every hour set to the region's annual mean; requires a full-year profile.
DemandProfile apply_flat(const DemandProfile& profile);

// Builds one scenario from the current profile. The combined scenario applies
// efficiency first, then heat pumps on heat demand scaled by heating_factor().
DemandProfile build_scenario(const DemandProfile& current, const ScenarioSpec& spec, const DemandProfile& heat,
                             const EndUseShares& shares);

struct ExtremeDays {
  int peak_day = 0;
  int min_day = 0;
  std::vector<int> peak_hours;  // hour-of-year indices, 24 each
  std::vector<int> min_hours;
};

// Days holding the national maximum and minimum hour (earliest on ties).
ExtremeDays extract_extreme_days(const DemandProfile& profile);
// Hour-of-year of the national maximum / minimum (earliest on ties).
int national_peak_hour(const DemandProfile& profile);
int national_min_hour(const DemandProfile& profile);

// Mean of national demand over the hours, divided into peak.
double peak_to_mean(const DemandProfile& profile);

// CSV: header `region,hour,<value_column>`.
DemandProfile parse_profile(std::string_view text, std::string scenario, const std::string& source = "<profile>");
DemandProfile load_profile(const std::filesystem::path& path, std::string scenario);
std::string profile_to_csv(const DemandProfile& profile, std::string_view value_column = "demand_mw");

EndUseShares parse_end_use_shares(std::string_view text, const std::string& source = "<shares>");
EndUseShares load_end_use_shares(const std::filesystem::path& path);
std::string end_use_shares_to_csv(const EndUseShares& shares);
// Throws SharesNotNormalized unless every region's shares sum to 1 within tolerance.
void validate_shares(const EndUseShares& shares, double tolerance = 1e-6);

// Per-bus MW for one hour: each region's demand split equally over its demand buses.
std::vector<double> bus_demand(const Grid& grid, const DemandProfile& profile, std::size_t hour_position);

}  // namespace gridrisk
