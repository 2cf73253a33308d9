#pragma once

// Post-processing of sweep results and their economic costs: cost-vs-loss
// curves, marginal cost per GW, regional change and population shares.

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridrisk/demand.hpp"
#include "gridrisk/failure_sim.hpp"
#include "gridrisk/grid.hpp"

namespace gridrisk {

// Costs per sweep record, indexed like ResultTable::records (record_id).
struct RecordCosts {
  std::vector<std::string> regions;  // economic regions
  std::vector<double> total;         // per record, currency per hour
  std::vector<double> regional;      // [record][region] loss
  std::vector<double> regional_va;   // [record][region] change in value added

  std::size_t size() const noexcept { return total.size(); }
  double regional_cost(std::size_t record, std::size_t region) const { return regional[record * regions.size() + region]; }
  void validate() const;
  bool operator==(const RecordCosts&) const = default;
};

// impact.csv: record_id,total_cost. impact_regional.csv: record_id,region,delta_va,cost.
std::string record_costs_to_csv(const RecordCosts& costs);
std::string regional_costs_to_csv(const RecordCosts& costs);
RecordCosts parse_record_costs(std::string_view total_csv, std::string_view regional_csv);
RecordCosts load_record_costs(const std::filesystem::path& total_csv, const std::filesystem::path& regional_csv);

// Mean of the two middle values for an even count. Throws on empty input.
double median(std::vector<double> values);

struct CostPoint {
  double fraction = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool operator==(const CostPoint&) const = default;
};

struct CostCurve {
  std::string scenario;
  std::vector<CostPoint> points;  // ascending fraction
  const CostPoint* at(double fraction) const;
  bool operator==(const CostCurve&) const = default;
};

// Median/min/max over every (ordering, hour) record of the scenario, per fraction.
// Throws MissingCosts when costs do not cover the records.
CostCurve build_cost_curve(const ResultTable& results, const RecordCosts& costs, std::string_view scenario);
std::vector<CostCurve> build_cost_curves(const ResultTable& results, const RecordCosts& costs);

// Smallest fraction whose median cost exceeds the threshold.
std::optional<double> first_impact_fraction(const CostCurve& curve, double threshold = 0.0);

struct PeakCost {
  double peak_gw = 0.0;
  double cost = 0.0;
};
// Least-squares slope of cost against peak demand; the exact secant for two
// points. Throws DegeneratePeaks when all peaks are equal.
double marginal_cost_per_gw(const std::vector<PeakCost>& points);
// Same, taking each scenario's median cost at the given fraction.
double marginal_cost_per_gw(const std::vector<CostCurve>& curves, const std::vector<double>& peak_gw, double fraction);

// Secant slope of median cost against lost capacity between consecutive fractions.
struct LossSlope {
  std::string scenario;
  double fraction_from = 0.0;
  double fraction_to = 0.0;
  double slope_per_gw = 0.0;
};
std::vector<LossSlope> marginal_cost_by_loss(const CostCurve& curve, double capacity_gw);

// Ratio of regional median costs against the current profile. NaN marks 0/0
// (no change); x/0 with x > 0 is +infinity.
inline constexpr double kNoChange = std::numeric_limits<double>::quiet_NaN();
inline bool is_no_change(double ratio) { return ratio != ratio; }

struct RegionalChange {
  std::string scenario;
  double fraction = 0.0;
  std::vector<std::string> regions;
  std::vector<double> ratios;
};
RegionalChange regional_relative_change(const ResultTable& results, const RecordCosts& costs, std::string_view scenario,
                                        double fraction, std::string_view baseline = "current");

enum class Direction { worse, better };

struct PopulationShares {
  double worse = 0.0;
  double better = 0.0;
  double unchanged = 0.0;  // worse + better + unchanged == 1 exactly
};
PopulationShares population_shares(const RegionalChange& change, const RegionTable& regions);
double population_share(const RegionalChange& change, const RegionTable& regions, Direction direction);

// Largest national demand (GW) among (scenario, hour) groups whose median cost
// is zero at every fraction; empty when no hour is free of costs.
std::optional<double> low_demand_threshold_gw(const ResultTable& results, const RecordCosts& costs,
                                              const ProfileSet& profiles);

std::string cost_curves_to_csv(const std::vector<CostCurve>& curves);
std::string regional_change_to_csv(const RegionalChange& change);
std::string format_ratio(double ratio);

}  // namespace gridrisk
