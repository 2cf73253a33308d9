#pragma once

// Multiregional impact assessment: a cost-minimizing production LP over
// supply-use tables. Capacity shocks cap industry output; the change in
// value added is reported per region and industry.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "gridrisk/demand.hpp"
#include "gridrisk/failure_sim.hpp"
#include "gridrisk/grid.hpp"
#include "gridrisk/numerics.hpp"

namespace gridrisk {

inline constexpr double kHoursPerYearD = 8760.0;

// Dense tables, all monetary values per year.
class SupplyUseModel {
 public:
  SupplyUseModel() = default;
  SupplyUseModel(std::vector<std::string> regions, std::vector<std::string> industries,
                 std::vector<std::string> products);

  const std::vector<std::string>& regions() const noexcept { return regions_; }
  const std::vector<std::string>& industries() const noexcept { return industries_; }
  const std::vector<std::string>& products() const noexcept { return products_; }
  std::size_t nr() const noexcept { return regions_.size(); }
  std::size_t ni() const noexcept { return industries_.size(); }
  std::size_t np() const noexcept { return products_.size(); }
  std::size_t region_index(std::string_view id) const;

  double& supply(std::size_t r, std::size_t i, std::size_t p) { return supply_[(r * ni() + i) * np() + p]; }
  double supply(std::size_t r, std::size_t i, std::size_t p) const { return supply_[(r * ni() + i) * np() + p]; }
  double& use(std::size_t r, std::size_t p, std::size_t i) { return use_[(r * np() + p) * ni() + i]; }
  double use(std::size_t r, std::size_t p, std::size_t i) const { return use_[(r * np() + p) * ni() + i]; }
  double& final_demand(std::size_t r, std::size_t p) { return final_demand_[r * np() + p]; }
  double final_demand(std::size_t r, std::size_t p) const { return final_demand_[r * np() + p]; }
  double& value_added(std::size_t r, std::size_t i) { return value_added_[r * ni() + i]; }
  double value_added(std::size_t r, std::size_t i) const { return value_added_[r * ni() + i]; }
  // Trade of product p from region a into region b.
  char& trade_allowed(std::size_t a, std::size_t b, std::size_t p) { return trade_[(a * nr() + b) * np() + p]; }
  char trade_allowed(std::size_t a, std::size_t b, std::size_t p) const { return trade_[(a * nr() + b) * np() + p]; }

  double alpha = 0.025;  // overcapacity fraction

  // x0[r][i] = sum_p V[r][i][p]
  std::vector<double> baseline_output() const;
  // Net baseline export implied by the tables: sum_i V - sum_i U - f, per (r, p).
  std::vector<double> net_exports() const;

  // Entries finite and >= 0, coefficients in [0, 1]. Throws ValidationError.
  void validate_entries() const;
  // Product balance: regions without import (export) routes for a product may
  // not have a deficit (surplus), and every product nets to zero over all
  // regions, within 1e-6 relative. Throws UnbalancedTables naming the worst cell.
  void validate_balance() const;

  bool operator==(const SupplyUseModel&) const = default;

 private:
  std::vector<std::string> regions_, industries_, products_;
  std::vector<double> supply_, use_, final_demand_, value_added_;
  std::vector<char> trade_;
};

// Reads supply.csv, use.csv, final_demand.csv, value_added.csv and the
// optional trade.csv from a directory, then validates entries and balance.
// Ids are sorted; a missing trade.csv forbids all trade.
SupplyUseModel load_supply_use(const std::filesystem::path& dir);
void write_supply_use(const SupplyUseModel& model, const std::filesystem::path& dir);

// a[r][p][i] = U / x0 and s[r][i][p] = V / x0 (zero where x0 = 0).
struct TechnologyCoefficients {
  std::vector<double> input;  // [r][p][i]
  std::vector<double> share;  // [r][i][p]
};
TechnologyCoefficients technology_coefficients(const SupplyUseModel& model);

// Largest column sum of the industry-by-industry Leontief inverse over all regions.
double max_output_multiplier(const SupplyUseModel& model);

struct MriaOptions {
  double rationing_penalty = 0.0;  // 0: 10 x max_output_multiplier
  double trade_cost = 1e-4;        // per unit traded; keeps the baseline optimum unique
  bool allow_trade = true;         // false ignores the trade policy
  LpOptions lp;
};

struct CapacityShock {
  std::vector<double> delta;  // [r][i] in [0, 1]
  double duration_hours = 1.0;

  static CapacityShock none(const SupplyUseModel& model);
  // Same fraction for every industry of a region.
  static CapacityShock uniform(const SupplyUseModel& model, const std::vector<double>& per_region);
  bool is_zero() const;
};

struct ImpactResult {
  std::vector<double> output;      // [r][i] annual
  std::vector<double> delta_va;    // [r][i] per event duration, negative = loss
  std::vector<double> rationing;   // [r][p] per event duration
  double annual_total_cost = 0.0;  // -sum min(0, annual delta_va)
  double total_cost = 0.0;         // annual_total_cost * duration / 8760
  double objective = 0.0;

  // Loss per region (sum over industries of -min(0, delta_va)), per event duration.
  std::vector<double> regional_cost(std::size_t regions, std::size_t industries) const;
};

// The impact LP, exposed for oracle checks. Variables: x[r][i], then
// t[a->b][p] for each allowed route (a != b), then m[r][p].
LinearProgram impact_lp(const SupplyUseModel& model, const CapacityShock& shock, const MriaOptions& options = {});

// Zero-shock solve; throws BaselineMismatch naming the first (r, i) whose
// output differs from x0 by more than 1e-6 relative, or any rationing.
std::vector<double> solve_baseline(const SupplyUseModel& model, const MriaOptions& options = {});

ImpactResult assess_impact(const SupplyUseModel& model, const CapacityShock& shock, const MriaOptions& options = {});

// Uniform regional shock from one sweep record: for each economic region,
// sum of unserved MW over its districts / sum of district demand at that hour,
// capped at 1 (0 where demand is 0). Economic regions map to model regions by id.
CapacityShock shock_from_unserved(const ScenarioRecord& record, const std::vector<std::string>& record_regions,
                                  const RegionTable& regions, const DemandProfile& profile,
                                  const SupplyUseModel& model);

}  // namespace gridrisk
