#include "gridrisk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

void require_costs(const ResultTable& results, const RecordCosts& costs) {
  if (costs.size() != results.records.size())
    throw MissingCosts("costs cover " + std::to_string(costs.size()) + " of " +
                       std::to_string(results.records.size()) + " records");
  for (std::size_t k = 0; k < costs.size(); ++k)
    if (!std::isfinite(costs.total[k])) throw MissingCosts("record " + std::to_string(k) + " has no cost");
}

}  // namespace

void RecordCosts::validate() const {
  if (regional.size() != total.size() * regions.size() || regional_va.size() != regional.size())
    throw ValidationError("regional costs do not match the record count");
  for (double v : total)
    if (!(v >= 0.0)) throw ValidationError("record costs must be >= 0");
}

std::string record_costs_to_csv(const RecordCosts& costs) {
  std::string out = "record_id,total_cost\n";
  for (std::size_t k = 0; k < costs.size(); ++k)
    out += std::to_string(k) + ',' + csv::format_double(costs.total[k]) + '\n';
  return out;
}

std::string regional_costs_to_csv(const RecordCosts& costs) {
  std::string out = "record_id,region,delta_va,cost\n";
  const std::size_t nr = costs.regions.size();
  for (std::size_t k = 0; k < costs.size(); ++k)
    for (std::size_t r = 0; r < nr; ++r)
      out += std::to_string(k) + ',' + costs.regions[r] + ',' + csv::format_double(costs.regional_va[k * nr + r]) + ',' +
             csv::format_double(costs.regional[k * nr + r]) + '\n';
  return out;
}

RecordCosts parse_record_costs(std::string_view total_csv, std::string_view regional_csv) {
  RecordCosts c;
  auto rows = csv::parse_rows(total_csv);
  if (!rows.empty() && csv::is_header(rows.front())) rows.erase(rows.begin());
  for (const auto& row : rows) {
    if (row.fields.size() != 2) throw ParseError("impact.csv", row.line, "expected record_id,total_cost");
    const auto id = csv::parse_int(row.fields[0], "impact.csv", row.line);
    if (id != static_cast<long long>(c.total.size())) throw ParseError("impact.csv", row.line, "record ids must run 0, 1, 2, ...");
    c.total.push_back(csv::parse_double(row.fields[1], "impact.csv", row.line));
  }
  auto reg = csv::parse_rows(regional_csv);
  if (!reg.empty() && csv::is_header(reg.front())) reg.erase(reg.begin());
  // regions of record 0 fix the order
  for (const auto& row : reg) {
    if (row.fields.size() != 4) throw ParseError("impact_regional.csv", row.line, "expected record_id,region,delta_va,cost");
    if (csv::parse_int(row.fields[0], "impact_regional.csv", row.line) != 0) break;
    c.regions.push_back(row.fields[1]);
  }
  const std::size_t nr = c.regions.size();
  if (reg.size() != nr * c.total.size()) throw ValidationError("impact_regional.csv does not match impact.csv");
  for (std::size_t k = 0; k < reg.size(); ++k) {
    const auto& row = reg[k];
    if (row.fields.size() != 4) throw ParseError("impact_regional.csv", row.line, "expected record_id,region,delta_va,cost");
    if (csv::parse_int(row.fields[0], "impact_regional.csv", row.line) != static_cast<long long>(k / nr) ||
        row.fields[1] != c.regions[k % nr])
      throw ParseError("impact_regional.csv", row.line, "rows out of order");
    c.regional_va.push_back(csv::parse_double(row.fields[2], "impact_regional.csv", row.line));
    c.regional.push_back(csv::parse_double(row.fields[3], "impact_regional.csv", row.line));
  }
  c.validate();
  return c;
}

RecordCosts load_record_costs(const std::filesystem::path& total_csv, const std::filesystem::path& regional_csv) {
  return parse_record_costs(csv::read_text(total_csv), csv::read_text(regional_csv));
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

const CostPoint* CostCurve::at(double fraction) const {
  for (const auto& p : points)
    if (p.fraction == fraction) return &p;
  return nullptr;
}

CostCurve build_cost_curve(const ResultTable& results, const RecordCosts& costs, std::string_view scenario) {
  require_costs(results, costs);
  std::map<double, std::vector<double>> by_fraction;
  for (std::size_t k = 0; k < results.records.size(); ++k)
    if (results.records[k].scenario == scenario) by_fraction[results.records[k].loss_fraction].push_back(costs.total[k]);
  if (by_fraction.empty()) throw ValidationError("no records for scenario '" + std::string(scenario) + "'");
  CostCurve curve{std::string(scenario), {}};
  for (const auto& [fraction, sample] : by_fraction) {
    const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
    curve.points.push_back({fraction, median(sample), *lo, *hi});
  }
  return curve;
}

std::vector<CostCurve> build_cost_curves(const ResultTable& results, const RecordCosts& costs) {
  std::vector<std::string> scenarios;
  for (const auto& r : results.records) scenarios.push_back(r.scenario);
  std::sort(scenarios.begin(), scenarios.end());
  scenarios.erase(std::unique(scenarios.begin(), scenarios.end()), scenarios.end());
  std::vector<CostCurve> out;
  for (const auto& s : scenarios) out.push_back(build_cost_curve(results, costs, s));
  return out;
}

std::optional<double> first_impact_fraction(const CostCurve& curve, double threshold) {
  for (const auto& p : curve.points)
    if (p.median > threshold) return p.fraction;
  return std::nullopt;
}

double marginal_cost_per_gw(const std::vector<PeakCost>& points) {
  // Work in MW: scenario peaks are whole megawatts, so their differences are exact.
  if (points.size() < 2) throw DegeneratePeaks("need at least two scenarios");
  if (points.size() == 2) {
    const double dx = points[1].peak_gw * 1000.0 - points[0].peak_gw * 1000.0;
    if (dx == 0.0) throw DegeneratePeaks("all scenario peaks are equal");
    return (points[1].cost - points[0].cost) * 1000.0 / dx;
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.peak_gw * 1000.0;
    my += p.cost;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : points) {
    const double dx = p.peak_gw * 1000.0 - mx;
    sxy += dx * (p.cost - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DegeneratePeaks("all scenario peaks are equal");
  return sxy * 1000.0 / sxx;
}

double marginal_cost_per_gw(const std::vector<CostCurve>& curves, const std::vector<double>& peak_gw, double fraction) {
  if (curves.size() != peak_gw.size()) throw ValidationError("one peak per curve is required");
  std::vector<PeakCost> points;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto* p = curves[k].at(fraction);
    if (!p) throw MissingCosts("scenario '" + curves[k].scenario + "' has no point at fraction " + csv::format_double(fraction));
    points.push_back({peak_gw[k], p->median});
  }
  return marginal_cost_per_gw(points);
}

std::vector<LossSlope> marginal_cost_by_loss(const CostCurve& curve, double capacity_gw) {
  if (!(capacity_gw > 0.0)) throw ValidationError("capacity must be > 0");
  std::vector<LossSlope> out;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    out.push_back({curve.scenario, a.fraction, b.fraction,
                   (b.median - a.median) / ((b.fraction - a.fraction) * capacity_gw)});
  }
  return out;
}

RegionalChange regional_relative_change(const ResultTable& results, const RecordCosts& costs, std::string_view scenario,
                                        double fraction, std::string_view baseline) {
  require_costs(results, costs);
  costs.validate();
  const std::size_t nr = costs.regions.size();
  std::vector<std::vector<double>> mine(nr), base(nr);
  for (std::size_t k = 0; k < results.records.size(); ++k) {
    const auto& rec = results.records[k];
    if (rec.loss_fraction != fraction) continue;
    for (std::size_t r = 0; r < nr; ++r) {
      if (rec.scenario == scenario) mine[r].push_back(costs.regional_cost(k, r));
      if (rec.scenario == baseline) base[r].push_back(costs.regional_cost(k, r));
    }
  }
  if (nr > 0 && (mine[0].empty() || base[0].empty()))
    throw MissingCosts("no records for '" + std::string(scenario) + "' and '" + std::string(baseline) +
                       "' at fraction " + csv::format_double(fraction));
  RegionalChange out{std::string(scenario), fraction, costs.regions, {}};
  for (std::size_t r = 0; r < nr; ++r) {
    const double num = median(mine[r]);
    const double den = median(base[r]);
    if (den == 0.0)
      out.ratios.push_back(num == 0.0 ? kNoChange : std::numeric_limits<double>::infinity());
    else
      out.ratios.push_back(num / den);
  }
  return out;
}

PopulationShares population_shares(const RegionalChange& change, const RegionTable& regions) {
  double total = 0.0, worse = 0.0, better = 0.0;
  for (std::size_t r = 0; r < change.regions.size(); ++r) {
    if (regions.districts_of(change.regions[r]).empty())
      throw ValidationError("no population for region '" + change.regions[r] + "'");
    const double pop = regions.population_of(change.regions[r]);
    total += pop;
    const double ratio = change.ratios[r];
    if (is_no_change(ratio)) continue;
    if (ratio > 1.0) worse += pop;
    if (ratio < 1.0) better += pop;
  }
  if (!(total > 0.0)) throw ValidationError("regions have no population");
  PopulationShares s;
  s.worse = worse / total;
  s.better = better / total;
  // unchanged is the remainder, so the three add to 1 in floating point too
  if (s.worse + s.better >= 1.0 || worse + better == total) {
    if (better > 0.0) s.better = 1.0 - s.worse;
    s.unchanged = 0.0;
  } else {
    s.unchanged = 1.0 - (s.worse + s.better);
  }
  return s;
}

double population_share(const RegionalChange& change, const RegionTable& regions, Direction direction) {
  const auto s = population_shares(change, regions);
  return direction == Direction::worse ? s.worse : s.better;
}

std::optional<double> low_demand_threshold_gw(const ResultTable& results, const RecordCosts& costs,
                                              const ProfileSet& profiles) {
  require_costs(results, costs);
  std::map<std::tuple<std::string, int, double>, std::vector<double>> groups;
  for (std::size_t k = 0; k < results.records.size(); ++k) {
    const auto& rec = results.records[k];
    groups[{rec.scenario, rec.hour, rec.loss_fraction}].push_back(costs.total[k]);
  }
  std::map<std::pair<std::string, int>, bool> free_of_cost;
  for (const auto& [key, sample] : groups) {
    const auto id = std::make_pair(std::get<0>(key), std::get<1>(key));
    const bool zero = median(sample) == 0.0;
    auto [it, inserted] = free_of_cost.emplace(id, zero);
    if (!inserted) it->second = it->second && zero;
  }
  std::optional<double> best;
  for (const auto& [id, zero] : free_of_cost) {
    if (!zero) continue;
    const auto p = profiles.find(id.first);
    if (p == profiles.end()) throw ValidationError("no profile for scenario '" + id.first + "'");
    const double gw = p->second.national()[p->second.hour_position(id.second)] / 1000.0;
    if (!best || gw > *best) best = gw;
  }
  return best;
}

std::string format_ratio(double ratio) {
  if (is_no_change(ratio)) return "no_change";
  if (std::isinf(ratio)) return "inf";
  return csv::format_double(ratio);
}

std::string cost_curves_to_csv(const std::vector<CostCurve>& curves) {
  std::string out = "scenario,fraction,median,min,max\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      out += c.scenario + ',' + csv::format_double(p.fraction) + ',' + csv::format_double(p.median) + ',' +
             csv::format_double(p.min) + ',' + csv::format_double(p.max) + '\n';
  return out;
}

std::string regional_change_to_csv(const RegionalChange& change) {
  std::string out = "region,ratio\n";
  for (std::size_t r = 0; r < change.regions.size(); ++r)
    out += change.regions[r] + ',' + format_ratio(change.ratios[r]) + '\n';
  return out;
}

}  // namespace gridrisk
