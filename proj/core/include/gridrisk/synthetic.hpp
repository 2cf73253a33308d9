#pragma once

// Seeded synthetic fixtures: a five-bus teaching network and a ~100-bus
// north-supply / south-demand network, each with regions, a full-year
// demand profile, heat demand, end-use shares and supply-use tables.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "gridrisk/demand.hpp"
#include "gridrisk/grid.hpp"
#include "gridrisk/mria.hpp"

namespace gridrisk {

enum class FixtureSize { small, gb_like };
std::string_view to_string(FixtureSize size);
FixtureSize parse_fixture_size(std::string_view text);

struct Fixture {
  Grid grid{{}, {}, {}};
  RegionTable regions;
  DemandProfile current;
  DemandProfile heat;
  EndUseShares shares;
  SupplyUseModel economy;
  ScenarioSpec scenario;  // heat-pump and efficiency parameters the fixture was tuned with
};

// Efficiency factors used by both fixtures (overall reduction about 20%).
std::map<std::string, double> default_efficiency_factors();

// Two-industry, two-product tables per region: I1 makes P1, which is mostly
// an input to I2; I2 makes P2, mostly final demand. Scaled so each region's
// value added equals its annual_va. Trade is allowed between consecutive
// regions in id order.
SupplyUseModel synthetic_supply_use(const RegionTable& regions);

Fixture make_small_fixture(std::uint64_t seed);

// National current peak 52.1 GW; heat demand scaled so the heat-pump peak
// is 57.7 GW.
inline constexpr double kGbCurrentPeakMw = 52100.0;
inline constexpr double kGbHeatPumpPeakMw = 57700.0;
Fixture make_gb_like_fixture(std::uint64_t seed);

Fixture make_fixture(FixtureSize size, std::uint64_t seed);

// grid.csv, regions.csv, demand_current.csv, heat.csv, end_use_shares.csv,
// supply_use/*.csv and run.cfg (a config that runs the whole pipeline).
void write_fixture(const Fixture& fixture, FixtureSize size, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace gridrisk
