#include "gridrisk/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gridrisk/config.hpp"
#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"
#include "gridrisk/random.hpp"

namespace gridrisk {
namespace {

std::string padded(std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return buf;
}

// Uniform in [lo, hi).
double draw(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

EndUseShares synthetic_shares(const RegionTable& regions, std::mt19937_64& rng) {
  static constexpr double kTypical[] = {0.20, 0.08, 0.15, 0.12, 0.10, 0.10, 0.05, 0.20};
  EndUseShares out;
  for (const auto& r : regions.regions()) {
    std::vector<double> w;
    double sum = 0.0;
    for (double t : kTypical) {
      w.push_back(t * draw(rng, 0.8, 1.2));
      sum += w.back();
    }
    auto& row = out[r.id];
    double used = 0.0;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) {
      row[std::string(kEndUses[k])] = w[k] / sum;
      used += w[k] / sum;
    }
    row[std::string(kEndUses[w.size() - 1])] = 1.0 - used;
  }
  return out;
}

double national_peak(const DemandProfile& p) {
  const auto n = p.national();
  return *std::max_element(n.begin(), n.end());
}

// Scales each region's annual energy so the synthesized national peak hits target.
RegionTable scale_to_peak(const RegionTable& regions, const ShapeParams& shape, std::uint64_t seed, double target_mw) {
  const double peak = national_peak(synthesize_current(regions, shape, seed));
  std::vector<Region> scaled = regions.regions();
  for (auto& r : scaled) r.annual_gwh *= target_mw / peak;
  return RegionTable(std::move(scaled));
}

// Heat scale giving the requested heat-pump peak, by bisection.
DemandProfile calibrated_heat(const RegionTable& regions, const DemandProfile& current, const ScenarioSpec& spec,
                              std::uint64_t seed, double target_mw) {
  HeatShapeParams hp;
  auto peak_for = [&](double scale) {
    hp.heat_to_electric = scale;
    return national_peak(apply_heat_pump(current, spec, synthesize_heat(regions, hp, seed)));
  };
  double lo = 0.0, hi = 1.0;
  while (peak_for(hi) < target_mw) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (peak_for(mid) < target_mw ? lo : hi) = mid;
  }
  hp.heat_to_electric = 0.5 * (lo + hi);
  return synthesize_heat(regions, hp, seed);
}

ScenarioSpec fixture_scenario() {
  ScenarioSpec s;
  s.efficiency_factors = default_efficiency_factors();
  return s;
}

}  // namespace

std::string_view to_string(FixtureSize size) { return size == FixtureSize::small ? "small" : "gb-like"; }

FixtureSize parse_fixture_size(std::string_view text) {
  if (text == "small") return FixtureSize::small;
  if (text == "gb-like" || text == "gb_like") return FixtureSize::gb_like;
  throw ValidationError("unknown fixture size '" + std::string(text) + "' (small or gb-like)");
}

std::map<std::string, double> default_efficiency_factors() {
  return {{"space_heating", 0.75}, {"water_heating", 0.80}, {"lighting", 0.60},
          {"cold", 0.80},          {"cooking", 0.90},       {"wet", 0.85},
          {"cooling_humidification", 0.80}, {"high_temperature_process", 0.90}};
}

SupplyUseModel synthetic_supply_use(const RegionTable& table) {
  const auto ids = table.economic_regions();
  SupplyUseModel m(ids, {"I1", "I2"}, {"P1", "P2"});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    double va = 0.0;
    for (const auto& d : table.districts_of(ids[r])) va += table.at(d).annual_value_added;
    const double s = va / 100.0;
    m.supply(r, 0, 0) = 100.0 * s;
    m.supply(r, 1, 1) = 100.0 * s;
    m.use(r, 0, 1) = 90.0 * s;
    m.use(r, 1, 0) = 10.0 * s;
    m.final_demand(r, 0) = 10.0 * s;
    m.final_demand(r, 1) = 90.0 * s;
    m.value_added(r, 0) = 0.9;
    m.value_added(r, 1) = 0.1;
    if (r + 1 < ids.size()) {
      for (std::size_t p = 0; p < 2; ++p) {
        m.trade_allowed(r, r + 1, p) = 1;
        m.trade_allowed(r + 1, r, p) = 1;
      }
    }
  }
  return m;
}

Fixture make_small_fixture(std::uint64_t seed) {
  std::vector<Bus> buses{
      {"B1", 400, BusKind::generation, "", Coordinates{0, 100}},
      {"B2", 400, BusKind::substation, "", Coordinates{-40, 60}},
      {"B3", 400, BusKind::substation, "", Coordinates{40, 60}},
      {"B4", 132, BusKind::demand, "D1", Coordinates{-40, 20}},
      {"B5", 132, BusKind::demand, "D2", Coordinates{40, 20}},
  };
  std::vector<Branch> branches{
      {"L12", "B1", "B2", BranchKind::line, 50, 400},       {"L13", "B1", "B3", BranchKind::line, 50, 400},
      {"L23", "B2", "B3", BranchKind::line, 40, 300},       {"T24", "B2", "B4", BranchKind::transformer, 20, 250},
      {"T35", "B3", "B5", BranchKind::transformer, 20, 250}, {"L45", "B4", "B5", BranchKind::line, 10, 150},
  };
  std::vector<Generator> gens{
      {"G1", "B1", 400, 0.9, Technology::thermal},
      {"G2", "B5", 200, 0.4, Technology::wind},
  };
  Fixture f;
  f.grid = Grid(std::move(buses), std::move(branches), std::move(gens));
  f.regions = RegionTable({{"D1", "E1", 400000, 12000, 1100}, {"D2", "E2", 600000, 18000, 900}});
  f.scenario = fixture_scenario();
  f.current = synthesize_current(f.regions, ShapeParams{}, seed);
  HeatShapeParams hp;
  hp.heat_to_electric = 0.8;
  f.heat = synthesize_heat(f.regions, hp, seed);
  std::mt19937_64 rng(derive_seed(seed, 1));
  f.shares = synthetic_shares(f.regions, rng);
  f.economy = synthetic_supply_use(f.regions);
  return f;
}

Fixture make_gb_like_fixture(std::uint64_t seed) {
  constexpr std::size_t kRows = 20;
  constexpr std::size_t kDistricts = 40;
  constexpr std::size_t kEconomic = 4;
  // Domestic derated capacity: 58 GW dispatchable plus 4 GW solar; 1 GW of interconnectors.
  constexpr double kDispatchableMw = 58000.0;
  constexpr double kSolarMw = 4000.0;
  constexpr double kInterconnectorMw = 500.0;

  std::mt19937_64 rng(derive_seed(seed, 2));
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;
  auto backbone = [](std::size_t row, std::size_t col) { return "B" + padded(row, 2) + (col == 0 ? "A" : "B"); };

  for (std::size_t r = 0; r < kRows; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      buses.push_back({backbone(r, c), 400, BusKind::substation, "",
                       Coordinates{c == 0 ? -60.0 : 60.0, 1000.0 - 50.0 * static_cast<double>(r)}});
  for (std::size_t r = 0; r < kRows; ++r) {
    branches.push_back({"R" + padded(r, 2), backbone(r, 0), backbone(r, 1), BranchKind::line, draw(rng, 60, 100), 4000});
    if (r + 1 < kRows)
      for (std::size_t c = 0; c < 2; ++c)
        branches.push_back({"S" + padded(r, 2) + (c == 0 ? "A" : "B"), backbone(r, c), backbone(r + 1, c),
                            BranchKind::line, draw(rng, 60, 100), 6000});
  }

  // Districts: two per backbone row, population rising towards the south.
  std::vector<Region> regions;
  for (std::size_t k = 0; k < kDistricts; ++k) {
    const std::string id = "DST" + padded(k + 1, 2);
    const std::size_t row = k / 2;
    const double pop = 1.0e6 * (0.6 + 1.4 * static_cast<double>(k) / (kDistricts - 1)) * draw(rng, 0.85, 1.15);
    const std::string parent = "ECON" + std::to_string(k / (kDistricts / kEconomic) + 1);
    regions.push_back({id, parent, std::round(pop), 0.0, pop * 5.0e-3 * draw(rng, 0.9, 1.1)});
    // value added in currency millions per year, about 30 thousand per person
    regions.back().annual_value_added = std::round(pop * 0.03 * draw(rng, 0.9, 1.1));
    const std::string bus = "L" + padded(k + 1, 2);
    buses.push_back({bus, 132, BusKind::demand, id,
                     Coordinates{(k % 2 == 0 ? -90.0 : 90.0), 1000.0 - 50.0 * static_cast<double>(row)}});
    branches.push_back({"T" + padded(k + 1, 2), backbone(row, k % 2), bus, BranchKind::transformer, draw(rng, 25, 40), 3000});
  }

  // Generation buses, one per row; the north carries most of the capacity.
  std::vector<double> weights;
  for (std::size_t r = 0; r < kRows; ++r) {
    const std::string bus = "P" + padded(r, 2);
    buses.push_back({bus, 275, BusKind::generation, "", Coordinates{0.0, 1000.0 - 50.0 * static_cast<double>(r)}});
    branches.push_back({"X" + padded(r, 2), bus, backbone(r, r % 2), BranchKind::transformer, draw(rng, 40, 60), 5000});
    const bool north = r < 8;
    const Technology mix[4] = {north ? Technology::nuclear : Technology::thermal,
                               north ? Technology::wind : Technology::thermal,
                               north ? Technology::hydro : Technology::nuclear,
                               north ? Technology::thermal : Technology::other_renewable};
    for (std::size_t g = 0; g < 4; ++g) {
      const double w = (north ? 1.6 : 0.7) * draw(rng, 0.5, 1.5);
      weights.push_back(w);
      gens.push_back({"G" + padded(r, 2) + std::to_string(g), bus, w, 1.0, mix[g]});
    }
    if (!north && r >= 12)
      gens.push_back({"G" + padded(r, 2) + "S", bus, kSolarMw / 8.0 / 0.12, 0.12, Technology::solar});
  }
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  for (auto& g : gens) {
    if (g.technology == Technology::solar) continue;
    double cf = 0.85;
    switch (g.technology) {
      case Technology::wind: cf = 0.35; break;
      case Technology::hydro: cf = 0.40; break;
      case Technology::nuclear: cf = 0.90; break;
      case Technology::other_renewable: cf = 0.50; break;
      default: break;
    }
    g.capacity_factor = cf;
    g.rated_mw = std::round(g.rated_mw / wsum * kDispatchableMw / cf);
  }
  gens.push_back({"IC1", backbone(18, 1), kInterconnectorMw, 1.0, Technology::interconnector});
  gens.push_back({"IC2", backbone(19, 1), kInterconnectorMw, 1.0, Technology::interconnector});

  Fixture f;
  f.grid = Grid(std::move(buses), std::move(branches), std::move(gens));
  f.scenario = fixture_scenario();
  const ShapeParams shape;
  f.regions = scale_to_peak(RegionTable(std::move(regions)), shape, seed, kGbCurrentPeakMw);
  f.current = synthesize_current(f.regions, shape, seed);
  f.heat = calibrated_heat(f.regions, f.current, f.scenario, seed, kGbHeatPumpPeakMw);
  std::mt19937_64 share_rng(derive_seed(seed, 1));
  f.shares = synthetic_shares(f.regions, share_rng);
  f.economy = synthetic_supply_use(f.regions);
  return f;
}

Fixture make_fixture(FixtureSize size, std::uint64_t seed) {
  return size == FixtureSize::small ? make_small_fixture(seed) : make_gb_like_fixture(seed);
}

void write_fixture(const Fixture& f, FixtureSize size, std::uint64_t seed, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_file(dir / "grid.csv", grid_to_csv(f.grid));
  csv::write_file(dir / "regions.csv", regions_to_csv(f.regions));
  csv::write_file(dir / "demand_current.csv", profile_to_csv(f.current));
  csv::write_file(dir / "heat.csv", profile_to_csv(f.heat, "heat_mw"));
  csv::write_file(dir / "end_use_shares.csv", end_use_shares_to_csv(f.shares));
  write_supply_use(f.economy, dir / "supply_use");

  RunConfig c;
  c.grid_file = "grid.csv";
  c.regions_file = "regions.csv";
  c.profile_file = "demand_current.csv";
  c.heat_file = "heat.csv";
  c.shares_file = "end_use_shares.csv";
  c.supply_use_dir = "supply_use";
  c.out_dir = "out";
  c.scenario = f.scenario;
  c.experiment.master_seed = seed;
  if (size == FixtureSize::small) {
    c.experiment.n_orderings = 5;
    c.experiment.loss_fractions = {0.0, 0.5};
    c.analysis_fraction = 0.5;
  } else {
    c.experiment.n_orderings = 50;
    c.experiment.loss_fractions.clear();
    for (int k = 0; k <= 12; ++k) c.experiment.loss_fractions.push_back(k * 5 / 100.0);
  }
  csv::write_file(dir / "run.cfg", config_to_text(c));
}

}  // namespace gridrisk
