#include "gridrisk/demand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"
#include "gridrisk/random.hpp"

namespace gridrisk {
namespace {

std::vector<int> full_year_hours() {
  std::vector<int> h(kHoursPerYear);
  std::iota(h.begin(), h.end(), 0);
  return h;
}

std::vector<std::string> region_ids(const RegionTable& regions) {
  std::vector<std::string> ids;
  for (const auto& r : regions.regions()) ids.push_back(r.id);
  return ids;
}

double seasonal(int day, int peak_day, double amplitude) {
  return 1.0 + amplitude * std::cos(2.0 * std::numbers::pi * (day - peak_day) / kDaysPerYear);
}

// Shape * noise, rescaled so the region's hourly values sum to target_mwh.
template <class Shape>
DemandProfile synthesize(const RegionTable& regions, std::string scenario, std::uint64_t seed, double noise,
                         Shape&& shape, std::span<const double> target_mwh) {
  DemandProfile p(std::move(scenario), region_ids(regions), full_year_hours());
  for (std::size_t r = 0; r < p.regions.size(); ++r) {
    std::mt19937_64 rng(derive_seed(seed, r));
    double sum = 0.0;
    for (int h = 0; h < kHoursPerYear; ++h) {
      const double jitter = 1.0 + noise * (2.0 * uniform01(rng) - 1.0);
      const double v = shape(h / 24, h % 24) * jitter;
      p.at(r, static_cast<std::size_t>(h)) = v;
      sum += v;
    }
    const double scale = sum > 0.0 ? target_mwh[r] / sum : 0.0;
    for (int h = 0; h < kHoursPerYear; ++h) p.at(r, static_cast<std::size_t>(h)) *= scale;
  }
  return p;
}

void require_aligned(const DemandProfile& a, const DemandProfile& b) {
  if (a.regions != b.regions) throw MisalignedHours("profiles cover different regions");
  if (a.hours != b.hours) throw MisalignedHours("profiles have different hour axes");
}

int extreme_hour(const DemandProfile& profile, bool maximum) {
  if (profile.hours.empty()) throw ValidationError("profile has no hours");
  const auto nat = profile.national();
  std::size_t best = 0;
  for (std::size_t i = 1; i < nat.size(); ++i) {
    if (maximum ? nat[i] > nat[best] : nat[i] < nat[best]) best = i;
  }
  return profile.hours[best];
}

std::vector<int> day_hours(int day) {
  std::vector<int> out(24);
  for (int h = 0; h < 24; ++h) out[h] = day * 24 + h;
  return out;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::current: return "current";
    case ScenarioKind::efficiency: return "efficiency";
    case ScenarioKind::heat_pump: return "heat_pump";
    case ScenarioKind::heat_pump_efficiency: return "heat_pump_efficiency";
    case ScenarioKind::flat: return "flat";
  }
  return "?";
}

ScenarioKind parse_scenario(std::string_view text) {
  for (auto k : kAllScenarios)
    if (to_string(k) == text) return k;
  throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

double ScenarioSpec::factor(std::string_view end_use) const {
  const auto it = efficiency_factors.find(std::string(end_use));
  return it == efficiency_factors.end() ? 1.0 : it->second;
}

double ScenarioSpec::heating_factor() const { return 0.5 * (factor("space_heating") + factor("water_heating")); }

void ScenarioSpec::validate() const {
  if (!(hp_penetration >= 0.0 && hp_penetration <= 1.0)) throw ValidationError("hp_penetration must be in [0, 1]");
  if (!(hp_cop > 0.0) || !std::isfinite(hp_cop)) throw ValidationError("hp_cop must be > 0");
  for (const auto& [use, f] : efficiency_factors)
    if (!(f > 0.0 && f <= 1.0)) throw ValidationError("efficiency factor for " + use + " must be in (0, 1]");
}

DemandProfile::DemandProfile(std::string scenario_, std::vector<std::string> regions_, std::vector<int> hours_)
    : scenario(std::move(scenario_)), regions(std::move(regions_)), hours(std::move(hours_)),
      demand_mw(regions.size() * hours.size(), 0.0) {}

std::size_t DemandProfile::region_index(std::string_view id) const {
  const auto it = std::find(regions.begin(), regions.end(), id);
  if (it == regions.end()) throw ValidationError("profile has no region '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - regions.begin());
}

std::size_t DemandProfile::hour_position(int hour_of_year) const {
  const auto it = std::lower_bound(hours.begin(), hours.end(), hour_of_year);
  if (it == hours.end() || *it != hour_of_year)
    throw ValidationError("profile has no hour " + std::to_string(hour_of_year));
  return static_cast<std::size_t>(it - hours.begin());
}

std::vector<double> DemandProfile::national() const {
  std::vector<double> out(hours.size(), 0.0);
  for (std::size_t r = 0; r < regions.size(); ++r)
    for (std::size_t h = 0; h < hours.size(); ++h) out[h] += at(r, h);
  return out;
}

double DemandProfile::region_energy_mwh(std::size_t region) const {
  double s = 0.0;
  for (std::size_t h = 0; h < hours.size(); ++h) s += at(region, h);
  return s;
}

bool DemandProfile::is_full_year() const {
  if (hours.size() != static_cast<std::size_t>(kHoursPerYear)) return false;
  for (std::size_t i = 0; i < hours.size(); ++i)
    if (hours[i] != static_cast<int>(i)) return false;
  return true;
}

void DemandProfile::validate() const {
  if (demand_mw.size() != regions.size() * hours.size()) throw ValidationError("profile table has the wrong size");
  if (std::set<std::string>(regions.begin(), regions.end()).size() != regions.size())
    throw ValidationError("profile lists a region twice");
  for (std::size_t i = 0; i < hours.size(); ++i) {
    if (hours[i] < 0 || hours[i] >= kHoursPerYear) throw ValidationError("hour index out of range");
    if (i > 0 && hours[i] <= hours[i - 1]) throw ValidationError("profile hours must be strictly increasing");
  }
  for (double v : demand_mw)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("profile demand must be finite and >= 0");
}

DemandProfile synthesize_current(const RegionTable& regions, const ShapeParams& params, std::uint64_t seed) {
  std::vector<double> target;
  for (const auto& r : regions.regions()) target.push_back(r.annual_gwh * 1000.0);
  return synthesize(
      regions, "current", seed, params.noise,
      [&](int day, int hour) { return seasonal(day, params.peak_day, params.seasonal_amplitude) * params.diurnal[hour]; },
      target);
}

DemandProfile synthesize_heat(const RegionTable& regions, const HeatShapeParams& params, std::uint64_t seed) {
  std::vector<double> target;
  for (const auto& r : regions.regions()) target.push_back(r.annual_gwh * 1000.0 * params.heat_to_electric);
  return synthesize(
      regions, "heat", splitmix64(seed ^ 0x68656174ULL), params.noise,
      [&](int day, int hour) { return seasonal(day, params.peak_day, params.seasonal_amplitude) * params.diurnal[hour]; },
      target);
}

DemandProfile apply_heat_pump(const DemandProfile& profile, const ScenarioSpec& spec, const DemandProfile& heat) {
  spec.validate();
  require_aligned(profile, heat);
  DemandProfile out = profile;
  out.scenario = "heat_pump";
  const double k = spec.hp_penetration / spec.hp_cop;
  for (std::size_t i = 0; i < out.demand_mw.size(); ++i) out.demand_mw[i] += k * heat.demand_mw[i];
  return out;
}

DemandProfile apply_efficiency(const DemandProfile& profile, const ScenarioSpec& spec, const EndUseShares& shares) {
  spec.validate();
  validate_shares(shares);
  DemandProfile out = profile;
  out.scenario = "efficiency";
  const std::size_t n = out.hours.size();
  for (std::size_t r = 0; r < out.regions.size(); ++r) {
    const auto it = shares.find(out.regions[r]);
    if (it == shares.end()) throw ValidationError("no end-use shares for region '" + out.regions[r] + "'");
    double f = 0.0;
    for (const auto& [use, share] : it->second) f += share * spec.factor(use);
    f = std::min(f, 1.0);  // shares may sum to 1 + 1e-6
    for (std::size_t h = 0; h < n; ++h) out.at(r, h) *= f;
  }
  return out;
}

DemandProfile apply_flat(const DemandProfile& profile) {
  if (!profile.is_full_year()) throw ValidationError("flat profile needs a full-year profile");
  DemandProfile out = profile;
  out.scenario = "flat";
  const std::size_t n = out.hours.size();
  for (std::size_t r = 0; r < out.regions.size(); ++r) {
    const auto row = out.demand_mw.begin() + static_cast<std::ptrdiff_t>(r * n);
    // Constant rows are already flat; recomputing the mean could move them by an ulp.
    if (std::all_of(row, row + static_cast<std::ptrdiff_t>(n), [&](double v) { return v == *row; })) continue;
    const double mean = profile.region_energy_mwh(r) / static_cast<double>(n);
    for (std::size_t h = 0; h < n; ++h) out.at(r, h) = mean;
  }
  return out;
}

DemandProfile build_scenario(const DemandProfile& current, const ScenarioSpec& spec, const DemandProfile& heat,
                             const EndUseShares& shares) {
  DemandProfile out;
  switch (spec.kind) {
    case ScenarioKind::current: out = current; break;
    case ScenarioKind::efficiency: out = apply_efficiency(current, spec, shares); break;
    case ScenarioKind::heat_pump: out = apply_heat_pump(current, spec, heat); break;
    case ScenarioKind::heat_pump_efficiency: {
      DemandProfile adjusted = heat;
      const double f = spec.heating_factor();
      for (auto& v : adjusted.demand_mw) v *= f;
      out = apply_heat_pump(apply_efficiency(current, spec, shares), spec, adjusted);
      break;
    }
    case ScenarioKind::flat: out = apply_flat(current); break;
  }
  out.scenario = std::string(to_string(spec.kind));
  return out;
}

ExtremeDays extract_extreme_days(const DemandProfile& profile) {
  if (!profile.is_full_year()) throw ValidationError("extreme-day extraction needs a full-year profile");
  ExtremeDays out;
  out.peak_day = national_peak_hour(profile) / 24;
  out.min_day = national_min_hour(profile) / 24;
  out.peak_hours = day_hours(out.peak_day);
  out.min_hours = day_hours(out.min_day);
  return out;
}

int national_peak_hour(const DemandProfile& profile) { return extreme_hour(profile, true); }
int national_min_hour(const DemandProfile& profile) { return extreme_hour(profile, false); }

double peak_to_mean(const DemandProfile& profile) {
  const auto nat = profile.national();
  if (nat.empty()) throw ValidationError("profile has no hours");
  const double mean = std::accumulate(nat.begin(), nat.end(), 0.0) / static_cast<double>(nat.size());
  return *std::max_element(nat.begin(), nat.end()) / mean;
}

DemandProfile parse_profile(std::string_view text, std::string scenario, const std::string& source) {
  const auto rows = csv::parse_rows(text);
  std::vector<std::string> regions;
  std::map<std::string, std::size_t> region_pos;
  std::set<int> hour_set;
  std::map<std::pair<std::size_t, int>, double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && csv::is_header(row)) continue;
    if (row.fields.size() != 3) throw ParseError(source, row.line, "profile rows need 3 fields");
    const auto hour = csv::parse_int(row.fields[1], source, row.line);
    if (hour < 0 || hour >= kHoursPerYear) throw ParseError(source, row.line, "hour out of range");
    const double v = csv::parse_double(row.fields[2], source, row.line);
    if (!(v >= 0.0)) throw ParseError(source, row.line, "demand must be >= 0");
    auto [it, inserted] = region_pos.emplace(row.fields[0], regions.size());
    if (inserted) regions.push_back(row.fields[0]);
    hour_set.insert(static_cast<int>(hour));
    if (!values.emplace(std::make_pair(it->second, static_cast<int>(hour)), v).second)
      throw ParseError(source, row.line, "duplicate region/hour");
  }
  DemandProfile p(std::move(scenario), regions, std::vector<int>(hour_set.begin(), hour_set.end()));
  if (values.size() != p.demand_mw.size())
    throw MisalignedHours(source + ": regions do not share the same hours");
  for (const auto& [key, v] : values) p.at(key.first, p.hour_position(key.second)) = v;
  return p;
}

DemandProfile load_profile(const std::filesystem::path& path, std::string scenario) {
  return parse_profile(csv::read_text(path), std::move(scenario), path.string());
}

std::string profile_to_csv(const DemandProfile& profile, std::string_view value_column) {
  std::string out = "region,hour,";
  out += value_column;
  out += '\n';
  for (std::size_t r = 0; r < profile.regions.size(); ++r) {
    for (std::size_t h = 0; h < profile.hours.size(); ++h) {
      out += profile.regions[r];
      out += ',';
      out += std::to_string(profile.hours[h]);
      out += ',';
      out += csv::format_double(profile.at(r, h));
      out += '\n';
    }
  }
  return out;
}

EndUseShares parse_end_use_shares(std::string_view text, const std::string& source) {
  EndUseShares out;
  const auto rows = csv::parse_rows(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && csv::is_header(row)) continue;
    if (row.fields.size() != 3) throw ParseError(source, row.line, "share rows need 3 fields");
    const double share = csv::parse_double(row.fields[2], source, row.line);
    if (!(share >= 0.0 && share <= 1.0)) throw ParseError(source, row.line, "share must be in [0, 1]");
    if (!out[row.fields[0]].emplace(row.fields[1], share).second)
      throw ParseError(source, row.line, "duplicate region/end use");
  }
  return out;
}

EndUseShares load_end_use_shares(const std::filesystem::path& path) {
  return parse_end_use_shares(csv::read_text(path), path.string());
}

std::string end_use_shares_to_csv(const EndUseShares& shares) {
  std::string out = "region,end_use,share\n";
  for (const auto& [region, uses] : shares)
    for (const auto& [use, share] : uses) out += region + ',' + use + ',' + csv::format_double(share) + '\n';
  return out;
}

void validate_shares(const EndUseShares& shares, double tolerance) {
  for (const auto& [region, uses] : shares) {
    double s = 0.0;
    for (const auto& [use, share] : uses) s += share;
    if (std::abs(s - 1.0) > tolerance)
      throw SharesNotNormalized("end-use shares for '" + region + "' sum to " + csv::format_double(s));
  }
}

std::vector<double> bus_demand(const Grid& grid, const DemandProfile& profile, std::size_t hour_position) {
  const std::size_t n = grid.buses().size();
  std::vector<std::size_t> count(profile.regions.size(), 0);
  std::vector<std::size_t> region_of(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = grid.buses()[i];
    if (b.kind != BusKind::demand) continue;
    region_of[i] = profile.region_index(b.region);
    ++count[region_of[i]];
  }
  for (std::size_t r = 0; r < count.size(); ++r) {
    if (count[r] == 0 && profile.at(r, hour_position) > 0.0)
      throw ValidationError("region '" + profile.regions[r] + "' has demand but no demand bus");
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (region_of[i] != static_cast<std::size_t>(-1))
      out[i] = profile.at(region_of[i], hour_position) / static_cast<double>(count[region_of[i]]);
  return out;
}

}  // namespace gridrisk
