#include "gridrisk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"

namespace gridrisk {

std::string_view to_string(BusKind kind) {
  switch (kind) {
    case BusKind::generation: return "generation";
    case BusKind::substation: return "substation";
    case BusKind::switching: return "switching";
    case BusKind::demand: return "demand";
  }
  return "?";
}

std::string_view to_string(BranchKind kind) {
  switch (kind) {
    case BranchKind::line: return "line";
    case BranchKind::cable: return "cable";
    case BranchKind::transformer: return "transformer";
  }
  return "?";
}

std::string_view to_string(Technology tech) {
  switch (tech) {
    case Technology::solar: return "solar";
    case Technology::wind: return "wind";
    case Technology::hydro: return "hydro";
    case Technology::thermal: return "thermal";
    case Technology::nuclear: return "nuclear";
    case Technology::other_renewable: return "other_renewable";
    case Technology::interconnector: return "interconnector";
  }
  return "?";
}

BusKind parse_bus_kind(std::string_view text) {
  for (auto k : {BusKind::generation, BusKind::substation, BusKind::switching, BusKind::demand})
    if (to_string(k) == text) return k;
  throw ValidationError("unknown bus kind '" + std::string(text) + "'");
}

BranchKind parse_branch_kind(std::string_view text) {
  for (auto k : {BranchKind::line, BranchKind::cable, BranchKind::transformer})
    if (to_string(k) == text) return k;
  throw ValidationError("unknown branch kind '" + std::string(text) + "'");
}

Technology parse_technology(std::string_view text) {
  for (auto t : {Technology::solar, Technology::wind, Technology::hydro, Technology::thermal, Technology::nuclear,
                 Technology::other_renewable, Technology::interconnector})
    if (to_string(t) == text) return t;
  throw ValidationError("unknown generator technology '" + std::string(text) + "'");
}

namespace {

bool is_known_voltage(double kv) {
  return std::any_of(std::begin(kVoltageLevels), std::end(kVoltageLevels),
                     [kv](double level) { return std::abs(level - kv) <= 1e-9 * level; });
}

}  // namespace

Grid::Grid(std::vector<Bus> buses, std::vector<Branch> branches, std::vector<Generator> generators, double base_mva)
    : buses_(std::move(buses)), branches_(std::move(branches)), generators_(std::move(generators)), base_mva_(base_mva) {
  if (!(base_mva_ > 0.0) || !std::isfinite(base_mva_)) throw ValidationError("base_mva must be positive");

  for (std::size_t i = 0; i < buses_.size(); ++i) {
    const Bus& bus = buses_[i];
    if (bus.id.empty()) throw ValidationError("bus with empty id");
    if (!bus_index_.emplace(bus.id, i).second) throw ValidationError("duplicate bus id '" + bus.id + "'");
    if (!is_known_voltage(bus.voltage_kv)) {
      throw ValidationError("bus '" + bus.id + "' has unsupported voltage " + csv::format_double(bus.voltage_kv) + " kV");
    }
    if (bus.kind == BusKind::demand && bus.region.empty()) {
      throw ValidationError("demand bus '" + bus.id + "' carries no region");
    }
  }

  std::set<std::string> branch_ids;
  branch_ends_.reserve(branches_.size());
  for (const Branch& br : branches_) {
    if (!branch_ids.insert(br.id).second) throw ValidationError("duplicate branch id '" + br.id + "'");
    auto from = bus_index_.find(br.from_bus);
    auto to = bus_index_.find(br.to_bus);
    if (from == bus_index_.end() || to == bus_index_.end()) {
      throw ValidationError("branch '" + br.id + "' references missing bus '" +
                            (from == bus_index_.end() ? br.from_bus : br.to_bus) + "'");
    }
    if (from->second == to->second) throw ValidationError("branch '" + br.id + "' joins a bus to itself");
    if (!(br.susceptance_pu > 0.0) || !std::isfinite(br.susceptance_pu)) {
      throw ValidationError("branch '" + br.id + "' needs susceptance_pu > 0");
    }
    if (!(br.rating_mw > 0.0) || std::isnan(br.rating_mw)) throw ValidationError("branch '" + br.id + "' needs rating_mw > 0");
    const double v_from = buses_[from->second].voltage_kv;
    const double v_to = buses_[to->second].voltage_kv;
    const bool same_voltage = v_from == v_to;
    if (br.kind == BranchKind::transformer && same_voltage) {
      throw ValidationError("transformer '" + br.id + "' joins two buses at the same voltage");
    }
    if (br.kind != BranchKind::transformer && !same_voltage) {
      throw ValidationError(std::string(to_string(br.kind)) + " '" + br.id + "' joins buses at different voltages");
    }
    branch_ends_.emplace_back(from->second, to->second);
  }

  generator_bus_.reserve(generators_.size());
  for (std::size_t g = 0; g < generators_.size(); ++g) {
    const Generator& gen = generators_[g];
    if (!generator_index_.emplace(gen.id, g).second) throw ValidationError("duplicate generator id '" + gen.id + "'");
    auto bus = bus_index_.find(gen.bus);
    if (bus == bus_index_.end()) {
      throw ValidationError("generator '" + gen.id + "' references missing bus '" + gen.bus + "'");
    }
    if (!(gen.rated_mw > 0.0) || !std::isfinite(gen.rated_mw)) {
      throw ValidationError("generator '" + gen.id + "' needs rated_mw > 0");
    }
    if (!(gen.capacity_factor > 0.0 && gen.capacity_factor <= 1.0)) {
      throw ValidationError("generator '" + gen.id + "' needs 0 < capacity_factor <= 1");
    }
    generator_bus_.push_back(bus->second);
  }
}

std::optional<std::size_t> Grid::find_bus(std::string_view id) const {
  auto it = bus_index_.find(std::string(id));
  if (it == bus_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Grid::bus_index(std::string_view id) const {
  auto idx = find_bus(id);
  if (!idx) throw ValidationError("unknown bus '" + std::string(id) + "'");
  return *idx;
}

std::size_t Grid::generator_index(std::string_view id) const {
  auto it = generator_index_.find(std::string(id));
  if (it == generator_index_.end()) throw ValidationError("unknown generator '" + std::string(id) + "'");
  return it->second;
}

Grid Grid::with_ratings(const std::vector<double>& ratings_mw) const {
  if (ratings_mw.size() != branches_.size()) throw ValidationError("rating vector length != branch count");
  auto branches = branches_;
  for (std::size_t i = 0; i < branches.size(); ++i) branches[i].rating_mw = ratings_mw[i];
  return Grid(buses_, std::move(branches), generators_, base_mva_);
}

Grid Grid::without_branch(std::string_view branch_id) const {
  auto branches = branches_;
  auto it = std::find_if(branches.begin(), branches.end(), [&](const Branch& b) { return b.id == branch_id; });
  if (it == branches.end()) throw ValidationError("unknown branch '" + std::string(branch_id) + "'");
  branches.erase(it);
  return Grid(buses_, std::move(branches), generators_, base_mva_);
}

bool Grid::operator==(const Grid& other) const {
  return base_mva_ == other.base_mva_ && buses_ == other.buses_ && branches_ == other.branches_ &&
         generators_ == other.generators_;
}

// ---------------------------------------------------------------------------
// File I/O

namespace {

void expect_fields(const csv::Row& row, std::size_t min, std::size_t max, const std::string& source) {
  if (row.fields.size() < min || row.fields.size() > max) {
    throw ParseError(source, row.line,
                     row.fields[0] + " row needs " + std::to_string(min) +
                         (min == max ? "" : "-" + std::to_string(max)) + " fields, got " +
                         std::to_string(row.fields.size()));
  }
}

template <typename F>
auto with_line(const std::string& source, std::size_t line, F&& f) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(source, line, e.what());
  }
}

}  // namespace

Grid parse_grid(std::string_view text, const std::string& source, const GridLoadOptions& options) {
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  for (const auto& row : csv::parse_rows(text)) {
    const std::string& tag = row.fields[0];
    if (tag == "BUS") {
      expect_fields(row, 5, 7, source);
      Bus bus;
      bus.id = row.fields[1];
      bus.voltage_kv = csv::parse_double(row.fields[2], source, row.line);
      bus.kind = with_line(source, row.line, [&] { return parse_bus_kind(row.fields[3]); });
      bus.region = row.fields[4];
      const bool has_x = row.fields.size() > 5 && !row.fields[5].empty();
      const bool has_y = row.fields.size() > 6 && !row.fields[6].empty();
      if (has_x != has_y) throw ParseError(source, row.line, "coordinates need both x_km and y_km");
      if (has_x) {
        bus.coordinates = Coordinates{csv::parse_double(row.fields[5], source, row.line),
                                      csv::parse_double(row.fields[6], source, row.line)};
      }
      buses.push_back(std::move(bus));
    } else if (tag == "BRANCH") {
      expect_fields(row, 7, 7, source);
      Branch br;
      br.id = row.fields[1];
      br.from_bus = row.fields[2];
      br.to_bus = row.fields[3];
      br.kind = with_line(source, row.line, [&] { return parse_branch_kind(row.fields[4]); });
      br.susceptance_pu = csv::parse_double(row.fields[5], source, row.line);
      br.rating_mw = csv::parse_double(row.fields[6], source, row.line);
      branches.push_back(std::move(br));
    } else if (tag == "GEN") {
      expect_fields(row, 6, 6, source);
      Generator gen;
      gen.id = row.fields[1];
      gen.bus = row.fields[2];
      gen.rated_mw = csv::parse_double(row.fields[3], source, row.line);
      gen.capacity_factor = csv::parse_double(row.fields[4], source, row.line);
      gen.technology = with_line(source, row.line, [&] { return parse_technology(row.fields[5]); });
      generators.push_back(std::move(gen));
    } else {
      throw ParseError(source, row.line, "unknown row tag '" + tag + "'");
    }
  }
  Grid grid(std::move(buses), std::move(branches), std::move(generators), options.base_mva);
  if (options.require_connected) {
    const auto report = validate_connectivity(grid);
    if (report.component_count > 1) {
      throw DisconnectedGrid(source + ": network has " + std::to_string(report.component_count) +
                             " components; bus '" + report.components[1].front() + "' is not connected to '" +
                             report.components[0].front() + "'");
    }
  }
  return grid;
}

Grid load_grid(const std::filesystem::path& network_file, const GridLoadOptions& options) {
  std::ifstream in(network_file, std::ios::binary);
  if (!in) throw IoError("cannot open " + network_file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_grid(buffer.str(), network_file.string(), options);
}

void write_grid(std::ostream& out, const Grid& grid) {
  using csv::format_double;
  out << "# BUS,id,voltage_kv,kind,region,x_km,y_km\n";
  for (const auto& b : grid.buses()) {
    out << "BUS," << b.id << ',' << format_double(b.voltage_kv) << ',' << to_string(b.kind) << ',' << b.region << ',';
    if (b.coordinates) out << format_double(b.coordinates->x_km) << ',' << format_double(b.coordinates->y_km);
    else out << ',';
    out << '\n';
  }
  out << "# BRANCH,id,from,to,kind,susceptance_pu,rating_mw\n";
  for (const auto& br : grid.branches()) {
    out << "BRANCH," << br.id << ',' << br.from_bus << ',' << br.to_bus << ',' << to_string(br.kind) << ','
        << format_double(br.susceptance_pu) << ',' << format_double(br.rating_mw) << '\n';
  }
  out << "# GEN,id,bus,rated_mw,capacity_factor,technology\n";
  for (const auto& g : grid.generators()) {
    out << "GEN," << g.id << ',' << g.bus << ',' << format_double(g.rated_mw) << ','
        << format_double(g.capacity_factor) << ',' << to_string(g.technology) << '\n';
  }
}

std::string grid_to_csv(const Grid& grid) {
  std::ostringstream out;
  write_grid(out, grid);
  return out.str();
}

double total_capacity(const Grid& grid, bool include_international, bool exclude_solar) {
  double domestic = 0.0;
  for (const auto& g : grid.generators()) {
    if (g.is_international() || (exclude_solar && g.technology == Technology::solar)) continue;
    domestic += g.derated_mw();
  }
  if (!include_international) return domestic;
  return domestic + international_capacity(grid);
}

double international_capacity(const Grid& grid) {
  double total = 0.0;
  for (const auto& g : grid.generators())
    if (g.is_international()) total += g.derated_mw();
  return total;
}

std::vector<int> hop_distances(const Grid& grid, std::size_t source_bus) {
  const std::size_t n = grid.buses().size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t b = 0; b < grid.branches().size(); ++b) {
    adjacency[grid.branch_from(b)].push_back(grid.branch_to(b));
    adjacency[grid.branch_to(b)].push_back(grid.branch_from(b));
  }
  std::vector<int> dist(n, -1);
  std::deque<std::size_t> queue{source_bus};
  dist[source_bus] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto v : adjacency[u]) {
      if (dist[v] >= 0) continue;
      dist[v] = dist[u] + 1;
      queue.push_back(v);
    }
  }
  return dist;
}

ConnectivityReport validate_connectivity(const Grid& grid) {
  const std::size_t n = grid.buses().size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t b = 0; b < grid.branches().size(); ++b) {
    adjacency[grid.branch_from(b)].push_back(grid.branch_to(b));
    adjacency[grid.branch_to(b)].push_back(grid.branch_from(b));
  }
  std::vector<int> label(n, -1);
  ConnectivityReport report;
  for (std::size_t start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    const int id = static_cast<int>(report.component_count++);
    std::vector<std::size_t> members;
    std::deque<std::size_t> queue{start};
    label[start] = id;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      members.push_back(u);
      for (auto v : adjacency[u]) {
        if (label[v] >= 0) continue;
        label[v] = id;
        queue.push_back(v);
      }
    }
    std::sort(members.begin(), members.end());
    std::vector<std::string> ids;
    ids.reserve(members.size());
    for (auto m : members) ids.push_back(grid.buses()[m].id);
    report.components.push_back(std::move(ids));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Regions

RegionTable::RegionTable(std::vector<Region> regions) : regions_(std::move(regions)) {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const auto& r = regions_[i];
    if (r.id.empty()) throw ValidationError("region with empty id");
    if (!index_.emplace(r.id, i).second) throw ValidationError("duplicate region id '" + r.id + "'");
    if (r.parent.empty()) throw ValidationError("region '" + r.id + "' has no parent economic region");
    if (!(r.population >= 0.0) || !(r.annual_gwh >= 0.0) || !(r.annual_value_added >= 0.0)) {
      throw ValidationError("region '" + r.id + "' has negative population, value added or demand");
    }
  }
}

std::optional<std::size_t> RegionTable::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Region& RegionTable::at(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw ValidationError("unknown region '" + std::string(id) + "'");
  return regions_[*idx];
}

std::vector<std::string> RegionTable::economic_regions() const {
  std::set<std::string> parents;
  for (const auto& r : regions_) parents.insert(r.parent);
  return {parents.begin(), parents.end()};
}

std::vector<std::string> RegionTable::districts_of(std::string_view economic_region) const {
  std::vector<std::string> out;
  for (const auto& r : regions_)
    if (r.parent == economic_region) out.push_back(r.id);
  return out;
}

double RegionTable::population_of(std::string_view economic_region) const {
  double total = 0.0;
  for (const auto& r : regions_)
    if (r.parent == economic_region) total += r.population;
  return total;
}

RegionTable parse_regions(std::string_view text, const std::string& source) {
  std::vector<Region> regions;
  for (const auto& row : csv::parse_rows(text)) {
    if (row.fields[0] != "REGION") throw ParseError(source, row.line, "unknown row tag '" + row.fields[0] + "'");
    expect_fields(row, 6, 6, source);
    Region r;
    r.id = row.fields[1];
    r.parent = row.fields[2];
    r.population = csv::parse_double(row.fields[3], source, row.line);
    r.annual_value_added = csv::parse_double(row.fields[4], source, row.line);
    r.annual_gwh = csv::parse_double(row.fields[5], source, row.line);
    regions.push_back(std::move(r));
  }
  return RegionTable(std::move(regions));
}

RegionTable load_regions(const std::filesystem::path& region_file) {
  std::ifstream in(region_file, std::ios::binary);
  if (!in) throw IoError("cannot open " + region_file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_regions(buffer.str(), region_file.string());
}

std::string regions_to_csv(const RegionTable& table) {
  std::ostringstream out;
  out << "# REGION,id,parent,population,annual_va,annual_gwh\n";
  for (const auto& r : table.regions()) {
    out << "REGION," << r.id << ',' << r.parent << ',' << csv::format_double(r.population) << ','
        << csv::format_double(r.annual_value_added) << ',' << csv::format_double(r.annual_gwh) << '\n';
  }
  return out.str();
}

}  // namespace gridrisk
