#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridrisk {

enum class BusKind { generation, substation, switching, demand };
enum class BranchKind { line, cable, transformer };
enum class Technology { solar, wind, hydro, thermal, nuclear, other_renewable, interconnector };

std::string_view to_string(BusKind kind);
std::string_view to_string(BranchKind kind);
std::string_view to_string(Technology tech);
BusKind parse_bus_kind(std::string_view text);
BranchKind parse_branch_kind(std::string_view text);
Technology parse_technology(std::string_view text);

// Allowed nominal voltages in kV.
inline constexpr double kVoltageLevels[] = {400.0, 275.0, 132.0, 33.0, 11.0, 0.23};

struct Coordinates {
  double x_km = 0.0;
  double y_km = 0.0;
  bool operator==(const Coordinates&) const = default;
};

struct Bus {
  std::string id;
  double voltage_kv = 0.0;
  BusKind kind = BusKind::substation;
  std::string region;  // required on demand buses
  std::optional<Coordinates> coordinates;
  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  BranchKind kind = BranchKind::line;
  double susceptance_pu = 0.0;
  double rating_mw = 0.0;
  bool operator==(const Branch&) const = default;
};

struct Generator {
  std::string id;
  std::string bus;
  double rated_mw = 0.0;
  double capacity_factor = 1.0;
  Technology technology = Technology::thermal;

  double derated_mw() const noexcept { return rated_mw * capacity_factor; }
  bool is_international() const noexcept { return technology == Technology::interconnector; }
  bool operator==(const Generator&) const = default;
};

// Immutable electricity network. The constructor enforces referential
// integrity and per-element invariants; connectivity is checked separately
// (see validate_connectivity) so that partial networks can be inspected.
class Grid {
 public:
  Grid(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Generator> generators,
       double base_mva = 100.0);

  const std::vector<Bus>& buses() const noexcept { return buses_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  const std::vector<Generator>& generators() const noexcept { return generators_; }
  double base_mva() const noexcept { return base_mva_; }

  std::size_t bus_index(std::string_view id) const;  // throws ValidationError if unknown
  std::optional<std::size_t> find_bus(std::string_view id) const;
  std::size_t generator_index(std::string_view id) const;
  std::size_t branch_from(std::size_t branch) const noexcept { return branch_ends_[branch].first; }
  std::size_t branch_to(std::size_t branch) const noexcept { return branch_ends_[branch].second; }
  std::size_t generator_bus(std::size_t generator) const noexcept { return generator_bus_[generator]; }

  // Copy with replaced branch ratings (same order as branches()).
  Grid with_ratings(const std::vector<double>& ratings_mw) const;
  // Copy without the named branch.
  Grid without_branch(std::string_view branch_id) const;

  bool operator==(const Grid& other) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::vector<Generator> generators_;
  double base_mva_;
  std::unordered_map<std::string, std::size_t> bus_index_;
  std::unordered_map<std::string, std::size_t> generator_index_;
  std::vector<std::pair<std::size_t, std::size_t>> branch_ends_;
  std::vector<std::size_t> generator_bus_;
};

struct GridLoadOptions {
  double base_mva = 100.0;
  bool require_connected = true;
};

// Section-tagged CSV: BUS, BRANCH and GEN rows (see README for the schema).
Grid parse_grid(std::string_view text, const std::string& source = "<grid>", const GridLoadOptions& options = {});
Grid load_grid(const std::filesystem::path& network_file, const GridLoadOptions& options = {});
void write_grid(std::ostream& out, const Grid& grid);
std::string grid_to_csv(const Grid& grid);

// Sum of derated capacities. International and domestic capacity are summed
// separately and then added, so domestic + international == total exactly.
double total_capacity(const Grid& grid, bool include_international, bool exclude_solar);
double international_capacity(const Grid& grid);

struct ConnectivityReport {
  std::size_t component_count = 0;
  // Bus ids per component; components ordered by their first bus, ids in file order.
  std::vector<std::vector<std::string>> components;
};

ConnectivityReport validate_connectivity(const Grid& grid);

// Breadth-first hop counts from one bus; -1 marks unreachable buses.
std::vector<int> hop_distances(const Grid& grid, std::size_t source_bus);

// District-level regions with their parent economic region.
struct Region {
  std::string id;
  std::string parent;
  double population = 0.0;
  double annual_value_added = 0.0;
  double annual_gwh = 0.0;
  bool operator==(const Region&) const = default;
};

class RegionTable {
 public:
  RegionTable() = default;
  explicit RegionTable(std::vector<Region> regions);

  const std::vector<Region>& regions() const noexcept { return regions_; }
  const Region& at(std::string_view id) const;
  std::optional<std::size_t> find(std::string_view id) const;
  // Sorted unique parent ids.
  std::vector<std::string> economic_regions() const;
  std::vector<std::string> districts_of(std::string_view economic_region) const;
  double population_of(std::string_view economic_region) const;

 private:
  std::vector<Region> regions_;
  std::unordered_map<std::string, std::size_t> index_;
};

RegionTable parse_regions(std::string_view text, const std::string& source = "<regions>");
RegionTable load_regions(const std::filesystem::path& region_file);
std::string regions_to_csv(const RegionTable& table);

}  // namespace gridrisk
