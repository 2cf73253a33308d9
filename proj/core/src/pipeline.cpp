#include "gridrisk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

std::vector<int> parse_hour_list(const std::string& mode) {
  std::vector<int> hours;
  std::size_t start = 0;
  while (start < mode.size()) {
    auto comma = mode.find(',', start);
    if (comma == std::string::npos) comma = mode.size();
    const auto item = mode.substr(start, comma - start);
    if (item.find_first_not_of(' ') != std::string::npos)
      hours.push_back(static_cast<int>(csv::parse_int(item, "hours", 0)));
    start = comma + 1;
  }
  return hours;
}

double peak_gw(const DemandProfile& p) {
  const auto n = p.national();
  return *std::max_element(n.begin(), n.end()) / 1000.0;
}

std::filesystem::path out_file(const RunConfig& c, const char* name) { return c.out_dir / name; }

}  // namespace

Inputs load_inputs(const RunConfig& c) {
  Inputs in;
  in.grid = load_grid(c.grid_file);
  in.regions = load_regions(c.regions_file);
  in.current = load_profile(c.profile_file, "current");
  const bool needs_heat = std::any_of(c.scenarios.begin(), c.scenarios.end(), [](ScenarioKind k) {
    return k == ScenarioKind::heat_pump || k == ScenarioKind::heat_pump_efficiency;
  });
  const bool needs_shares = std::any_of(c.scenarios.begin(), c.scenarios.end(), [](ScenarioKind k) {
    return k == ScenarioKind::efficiency || k == ScenarioKind::heat_pump_efficiency;
  });
  if (needs_heat) in.heat = load_profile(c.heat_file, "heat");
  if (needs_shares) in.shares = load_end_use_shares(c.shares_file);
  if (!c.supply_use_dir.empty()) {
    in.economy = load_supply_use(c.supply_use_dir);
    in.economy.alpha = c.overcapacity;
  }
  for (const auto& r : in.current.regions)
    if (!in.regions.find(r)) throw ValidationError("profile region '" + r + "' is not in the region table");
  return in;
}

ProfileSet build_profiles(const Inputs& in, const RunConfig& c) {
  ProfileSet out;
  for (auto kind : c.scenarios) {
    ScenarioSpec spec = c.scenario;
    spec.kind = kind;
    out.emplace(std::string(to_string(kind)), build_scenario(in.current, spec, in.heat, in.shares));
  }
  return out;
}

std::vector<HourSpec> select_hours(const ProfileSet& profiles, const std::string& mode) {
  std::vector<HourSpec> out;
  for (const auto& [name, p] : profiles) {
    std::vector<int> hours;
    if (mode == "peak") {
      hours = {national_peak_hour(p)};
    } else if (mode == "peak_day" || mode == "extreme_days") {
      const auto days = extract_extreme_days(p);
      hours = days.peak_hours;
      if (mode == "extreme_days") hours.insert(hours.end(), days.min_hours.begin(), days.min_hours.end());
    } else {
      hours = parse_hour_list(mode);
    }
    std::sort(hours.begin(), hours.end());
    hours.erase(std::unique(hours.begin(), hours.end()), hours.end());
    for (int h : hours) out.push_back({name, h});
  }
  return out;
}

Simulation simulate(const Inputs& in, const ProfileSet& profiles, const RunConfig& c) {
  std::vector<DemandProfile> all;
  for (const auto& [name, p] : profiles) all.push_back(p);
  Simulation sim;
  sim.calibrated = calibrate_ratings(in.grid, all, c.calibration);
  ExperimentConfig e = c.experiment;
  e.hours = select_hours(profiles, c.hours);
  sim.results = run_experiment(sim.calibrated, profiles, e);
  return sim;
}

RecordCosts assess_records(const ResultTable& results, const Inputs& in, const ProfileSet& profiles, const RunConfig& c) {
  const auto& model = in.economy;
  if (model.nr() == 0) throw ValidationError("the config names no supply-use tables");
  solve_baseline(model, c.mria);

  // Unique shocks in first-seen order.
  std::map<std::vector<double>, std::size_t> index;
  std::vector<CapacityShock> shocks;
  std::vector<std::size_t> of_record;
  for (const auto& rec : results.records) {
    const auto p = profiles.find(rec.scenario);
    if (p == profiles.end()) throw ValidationError("no profile for scenario '" + rec.scenario + "'");
    auto s = shock_from_unserved(rec, results.regions, in.regions, p->second, model);
    const auto [it, inserted] = index.emplace(s.delta, shocks.size());
    if (inserted) shocks.push_back(std::move(s));
    of_record.push_back(it->second);
  }

  std::vector<ImpactResult> impacts(shocks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= shocks.size()) return;
      try {
        if (shocks[k].is_zero()) {
          impacts[k].output = model.baseline_output();
          impacts[k].delta_va.assign(model.nr() * model.ni(), 0.0);
          impacts[k].rationing.assign(model.nr() * model.np(), 0.0);
        } else {
          impacts[k] = assess_impact(model, shocks[k], c.mria);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = shocks.size();
        return;
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(c.experiment.workers, std::max<std::size_t>(shocks.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  RecordCosts costs;
  costs.regions = model.regions();
  const std::size_t nr = model.nr();
  for (std::size_t k : of_record) {
    const auto& r = impacts[k];
    costs.total.push_back(r.total_cost);
    const auto regional = r.regional_cost(nr, model.ni());
    for (std::size_t e = 0; e < nr; ++e) {
      double va = 0.0;
      for (std::size_t i = 0; i < model.ni(); ++i) va += r.delta_va[e * model.ni() + i];
      costs.regional.push_back(regional[e]);
      costs.regional_va.push_back(va);
    }
  }
  return costs;
}

AnalysisTables analyze(const ResultTable& results, const RecordCosts& costs, const Inputs& in,
                       const ProfileSet& profiles, const RunConfig& c) {
  AnalysisTables t;
  const auto curves = build_cost_curves(results, costs);
  t.cost_curve = cost_curves_to_csv(curves);

  std::vector<double> peaks;
  for (const auto& curve : curves) {
    const auto p = profiles.find(curve.scenario);
    if (p == profiles.end()) throw ValidationError("no profile for scenario '" + curve.scenario + "'");
    peaks.push_back(peak_gw(p->second));
  }
  t.marginal = "fraction,slope_per_gw\n";
  if (curves.size() >= 2) {
    for (const auto& point : curves.front().points) {
      try {
        t.marginal += csv::format_double(point.fraction) + ',' +
                      csv::format_double(marginal_cost_per_gw(curves, peaks, point.fraction)) + '\n';
      } catch (const DegeneratePeaks&) {
        // every scenario has the same peak: no slope at this fraction
      }
    }
  }
  const double capacity_gw = total_capacity(in.grid, false, false) / 1000.0;
  t.marginal_by_loss = "scenario,fraction_from,fraction_to,slope_per_gw\n";
  for (const auto& curve : curves)
    for (const auto& s : marginal_cost_by_loss(curve, capacity_gw))
      t.marginal_by_loss += s.scenario + ',' + csv::format_double(s.fraction_from) + ',' +
                            csv::format_double(s.fraction_to) + ',' + csv::format_double(s.slope_per_gw) + '\n';

  t.population_share = "scenario,worse,better,unchanged\n";
  const bool has_current = std::any_of(curves.begin(), curves.end(), [](const CostCurve& cc) { return cc.scenario == "current"; });
  for (const auto& curve : curves) {
    if (!has_current || curve.scenario == "current") continue;
    const auto change = regional_relative_change(results, costs, curve.scenario, c.analysis_fraction);
    t.regional_change.emplace_back(curve.scenario, regional_change_to_csv(change));
    const auto s = population_shares(change, in.regions);
    t.population_share += curve.scenario + ',' + csv::format_double(s.worse) + ',' + csv::format_double(s.better) +
                          ',' + csv::format_double(s.unchanged) + '\n';
  }

  t.thresholds = "statistic,scenario,value\n";
  for (const auto& curve : curves) {
    const auto f = first_impact_fraction(curve);
    t.thresholds += "first_impact_fraction," + curve.scenario + ',' + (f ? csv::format_double(*f) : "none") + '\n';
  }
  const auto low = low_demand_threshold_gw(results, costs, profiles);
  t.thresholds += std::string("low_demand_threshold_gw,all,") + (low ? csv::format_double(*low) : "none") + '\n';
  return t;
}

std::string provenance(const RunConfig& c) {
  std::string out = "# gridrisk run provenance\n";
  out += "seed = " + std::to_string(c.experiment.master_seed) + "\n";
  auto digest = [&](const char* key, const std::filesystem::path& p) {
    if (p.empty()) return;
    out += std::string("digest.") + key + " = " + csv::file_digest(p) + "\n";
  };
  digest("grid", c.grid_file);
  digest("regions", c.regions_file);
  digest("demand", c.profile_file);
  if (std::filesystem::exists(c.heat_file)) digest("heat", c.heat_file);
  if (std::filesystem::exists(c.shares_file)) digest("end_use_shares", c.shares_file);
  if (!c.supply_use_dir.empty()) {
    for (const char* f : {"supply.csv", "use.csv", "final_demand.csv", "value_added.csv", "trade.csv"})
      if (std::filesystem::exists(c.supply_use_dir / f))
        out += std::string("digest.supply_use.") + f + " = " + csv::file_digest(c.supply_use_dir / f) + "\n";
  }
  out += "\n# config\n";
  RunConfig echo = c;
  echo.experiment.workers = 1;
  // paths as given would differ between checkouts; keep file names only
  for (auto* p : {&echo.grid_file, &echo.regions_file, &echo.profile_file, &echo.heat_file, &echo.shares_file,
                  &echo.supply_use_dir, &echo.out_dir})
    *p = p->filename();
  const auto text = config_to_text(echo);
  for (std::size_t start = 0; start < text.size();) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl - start);
    if (line.rfind("workers", 0) != 0) out += line + "\n";
    start = nl + 1;
  }
  return out;
}

std::vector<std::filesystem::path> write_simulation(const Simulation& sim, const RunConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  const std::vector<std::filesystem::path> files{out_file(c, "results.csv"), out_file(c, "calibrated_grid.csv"),
                                                 out_file(c, "provenance.txt")};
  csv::write_file(files[0], results_to_csv(sim.results));
  csv::write_file(files[1], grid_to_csv(sim.calibrated));
  csv::write_file(files[2], provenance(c));
  return files;
}

std::vector<std::filesystem::path> write_costs(const RecordCosts& costs, const RunConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  const std::vector<std::filesystem::path> files{out_file(c, "impact.csv"), out_file(c, "impact_regional.csv")};
  csv::write_file(files[0], record_costs_to_csv(costs));
  csv::write_file(files[1], regional_costs_to_csv(costs));
  return files;
}

std::vector<std::filesystem::path> write_analysis(const AnalysisTables& t, const RunConfig& c) {
  std::filesystem::create_directories(c.out_dir);
  std::vector<std::filesystem::path> files;
  auto put = [&](const std::string& name, const std::string& text) {
    files.push_back(c.out_dir / name);
    csv::write_file(files.back(), text);
  };
  put("cost_curve.csv", t.cost_curve);
  put("marginal.csv", t.marginal);
  put("marginal_by_loss.csv", t.marginal_by_loss);
  for (const auto& [scenario, text] : t.regional_change) put("regional_change_" + scenario + ".csv", text);
  put("population_share.csv", t.population_share);
  put("thresholds.csv", t.thresholds);
  return files;
}

}  // namespace gridrisk
