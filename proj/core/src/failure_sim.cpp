#include "gridrisk/failure_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "gridrisk/csv.hpp"
#include "gridrisk/error.hpp"
#include "gridrisk/random.hpp"

namespace gridrisk {
namespace {

double domestic_capacity(const Grid& grid) { return total_capacity(grid, false, false); }

// Region index per bus (npos for buses without demand region).
std::vector<std::size_t> bus_regions(const Grid& grid, const std::vector<std::string>& regions) {
  std::vector<std::size_t> out(grid.buses().size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& b = grid.buses()[i];
    if (b.kind != BusKind::demand) continue;
    const auto it = std::find(regions.begin(), regions.end(), b.region);
    if (it != regions.end()) out[i] = static_cast<std::size_t>(it - regions.begin());
  }
  return out;
}

struct Task {
  const DemandProfile* profile;
  std::size_t position;
  std::string scenario;
  int hour;
};

}  // namespace

std::vector<double> default_loss_fractions() {
  std::vector<double> out;
  for (int i = 0; i <= 9; ++i) out.push_back(i * 5 / 100.0);
  return out;
}

void ExperimentConfig::validate() const {
  if (n_orderings < 1) throw ValidationError("n_orderings must be >= 1");
  if (loss_fractions.empty()) throw ValidationError("loss_fractions is empty");
  for (std::size_t i = 0; i < loss_fractions.size(); ++i) {
    if (!(loss_fractions[i] >= 0.0 && loss_fractions[i] <= 1.0)) throw ValidationError("loss fractions must be in [0, 1]");
    if (i > 0 && !(loss_fractions[i] > loss_fractions[i - 1]))
      throw ValidationError("loss fractions must be strictly ascending");
  }
  if (!(shed_step > 0.0 && shed_step <= 1.0)) throw ValidationError("shed_step must be in (0, 1]");
  if (!(interconnector_penalty > 0.0)) throw ValidationError("interconnector_penalty must be > 0");
  if (workers < 1) throw ValidationError("workers must be >= 1");
}

std::string_view to_string(RecordStatus status) {
  switch (status) {
    case RecordStatus::feasible: return "feasible";
    case RecordStatus::shed: return "shed";
    case RecordStatus::unstable: return "unstable";
  }
  return "?";
}

RecordStatus parse_record_status(std::string_view text) {
  for (auto s : {RecordStatus::feasible, RecordStatus::shed, RecordStatus::unstable})
    if (to_string(s) == text) return s;
  throw ValidationError("unknown record status '" + std::string(text) + "'");
}

Ordering generate_ordering(const Grid& grid, std::uint64_t master_seed, std::size_t index) {
  Ordering out;
  for (std::size_t g = 0; g < grid.generators().size(); ++g)
    if (!grid.generators()[g].is_international()) out.push_back(g);
  std::mt19937_64 rng(derive_seed(master_seed, index));
  shuffle(std::span<std::size_t>(out), rng);
  return out;
}

std::vector<Ordering> generate_orderings(const Grid& grid, std::size_t n, std::uint64_t master_seed) {
  std::vector<Ordering> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(generate_ordering(grid, master_seed, i));
  return out;
}

std::vector<std::size_t> removal_set(const Ordering& ordering, const Grid& grid, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ValidationError("fraction must be in [0, 1]");
  std::vector<std::size_t> out;
  if (fraction == 0.0) return out;
  const double target = fraction * domestic_capacity(grid);
  double cumulative = 0.0;
  for (auto g : ordering) {
    if (cumulative >= target) break;
    out.push_back(g);
    cumulative += grid.generators()[g].derated_mw();
  }
  if (fraction == 1.0) out = ordering;  // guard against rounding in the running sum
  return out;
}

std::vector<std::size_t> solar_generators(const Grid& grid) {
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < grid.generators().size(); ++g)
    if (grid.generators()[g].technology == Technology::solar) out.push_back(g);
  return out;
}

DispatchSolution dispatch_hour(const Dispatcher& dispatcher, const DemandProfile& profile, std::size_t hour_position,
                               std::span<const std::size_t> removed, double interconnector_penalty) {
  const Grid& grid = dispatcher.grid();
  auto problem = DispatchProblem::all_available(grid, bus_demand(grid, profile, hour_position), removed);
  for (auto g : solar_generators(grid)) problem.available[g] = 0;
  problem.interconnector_penalty = interconnector_penalty;
  return dispatcher.dispatch_with_shedding(problem, removed);
}

ResultTable run_experiment(const Grid& grid, const ProfileSet& profiles, const ExperimentConfig& config) {
  config.validate();
  if (config.hours.empty()) throw ValidationError("experiment has no hours");
  if (profiles.empty()) throw ValidationError("experiment has no profiles");

  ResultTable table;
  table.regions = profiles.begin()->second.regions;
  for (const auto& [name, p] : profiles)
    if (p.regions != table.regions) throw MisalignedHours("profile '" + name + "' covers different regions");

  std::vector<Task> tasks;
  for (const auto& h : config.hours) {
    const auto it = profiles.find(h.scenario);
    if (it == profiles.end()) throw ValidationError("no profile for scenario '" + h.scenario + "'");
    tasks.push_back({&it->second, it->second.hour_position(h.hour), h.scenario, h.hour});
  }
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return a.scenario != b.scenario ? a.scenario < b.scenario : a.hour < b.hour;
  });

  DispatchOptions dopts;
  dopts.shed_step = config.shed_step;
  dopts.interconnector_penalty = config.interconnector_penalty;
  dopts.impedance_weighted_distance = config.impedance_weighted;
  const Dispatcher dispatcher(grid, dopts);
  const auto region_of = bus_regions(grid, table.regions);
  const std::size_t nr = table.regions.size();
  const std::size_t per_ordering = config.loss_fractions.size() * tasks.size();

  table.records.resize(config.n_orderings * per_ordering);
  auto run_ordering = [&](std::size_t o) {
    const auto ordering = generate_ordering(grid, config.master_seed, o);
    std::size_t slot = o * per_ordering;
    for (double fraction : config.loss_fractions) {
      const auto removed = removal_set(ordering, grid, fraction);
      for (const auto& task : tasks) {
        ScenarioRecord& rec = table.records[slot++];
        rec.ordering_index = o;
        rec.loss_fraction = fraction;
        rec.scenario = task.scenario;
        rec.hour = task.hour;
        rec.unserved_mw_per_region.assign(nr, 0.0);
        try {
          const auto sol = dispatch_hour(dispatcher, *task.profile, task.position, removed,
                                         config.interconnector_penalty);
          rec.status = sol.status == DispatchStatus::feasible ? RecordStatus::feasible : RecordStatus::shed;
          for (std::size_t i = 0; i < region_of.size(); ++i)
            if (region_of[i] != static_cast<std::size_t>(-1)) rec.unserved_mw_per_region[region_of[i]] += sol.shed_mw[i];
        } catch (const Unstable&) {
          rec.status = RecordStatus::unstable;
          for (std::size_t r = 0; r < nr; ++r) rec.unserved_mw_per_region[r] = task.profile->at(r, task.position);
        }
        rec.total_unserved_mw = 0.0;
        for (double v : rec.unserved_mw_per_region) rec.total_unserved_mw += v;
      }
    }
  };

  const std::size_t workers = std::min(config.workers, config.n_orderings);
  if (workers <= 1) {
    for (std::size_t o = 0; o < config.n_orderings; ++o) run_ordering(o);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const auto o = next.fetch_add(1);
        if (o >= config.n_orderings) return;
        try {
          run_ordering(o);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = config.n_orderings;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return table;
}

Grid calibrate_ratings(const Grid& grid, const std::vector<DemandProfile>& profiles, const CalibrationOptions& options) {
  if (!(options.headroom_factor >= 1.0)) throw ValidationError("headroom_factor must be >= 1");
  std::vector<double> loose(grid.branches().size(), 1e15);
  const Dispatcher uncapacitated(grid.with_ratings(loose));
  std::vector<double> peak_flow(grid.branches().size(), 0.0);
  for (const auto& profile : profiles) {
    const auto position = profile.hour_position(national_peak_hour(profile));
    auto problem = DispatchProblem::all_available(grid, bus_demand(grid, profile, position), solar_generators(grid));
    problem.interconnector_penalty = options.interconnector_penalty;
    const auto sol = uncapacitated.redispatch(problem);
    if (sol.status != DispatchStatus::feasible)
      throw Unstable("peak-hour demand of '" + profile.scenario + "' cannot be met even without branch limits");
    for (std::size_t k = 0; k < peak_flow.size(); ++k)
      peak_flow[k] = std::max(peak_flow[k], std::abs(sol.flow_solution.flows_mw[k]));
  }
  std::vector<double> ratings(grid.branches().size());
  for (std::size_t k = 0; k < ratings.size(); ++k)
    ratings[k] = std::max(grid.branches()[k].rating_mw, options.headroom_factor * peak_flow[k]);
  return grid.with_ratings(ratings);
}

Grid calibrate_ratings(const Grid& grid, const DemandProfile& current_profile, const CalibrationOptions& options) {
  return calibrate_ratings(grid, std::vector<DemandProfile>{current_profile}, options);
}

std::string results_to_csv(const ResultTable& table) {
  std::string out = "ordering,fraction,scenario,hour,region,unserved_mw,status\n";
  for (const auto& rec : table.records) {
    const std::string prefix = std::to_string(rec.ordering_index) + ',' + csv::format_double(rec.loss_fraction) + ',' +
                               rec.scenario + ',' + std::to_string(rec.hour) + ',';
    const std::string status(to_string(rec.status));
    for (std::size_t r = 0; r < table.regions.size(); ++r)
      out += prefix + table.regions[r] + ',' + csv::format_double(rec.unserved_mw_per_region[r]) + ',' + status + '\n';
  }
  return out;
}

ResultTable parse_results(std::string_view text, const std::string& source) {
  ResultTable table;
  const auto rows = csv::parse_rows(text);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && row.fields.size() == 7 && row.fields[0] == "ordering") continue;
    if (row.fields.size() != 7) throw ParseError(source, row.line, "result rows need 7 fields");
    const auto ordering = csv::parse_int(row.fields[0], source, row.line);
    if (ordering < 0) throw ParseError(source, row.line, "negative ordering index");
    const double fraction = csv::parse_double(row.fields[1], source, row.line);
    const auto hour = static_cast<int>(csv::parse_int(row.fields[3], source, row.line));
    const double unserved = csv::parse_double(row.fields[5], source, row.line);
    RecordStatus status;
    try {
      status = parse_record_status(row.fields[6]);
    } catch (const ValidationError& e) {
      throw ParseError(source, row.line, e.what());
    }

    const bool same = !table.records.empty() && table.records.back().ordering_index == static_cast<std::size_t>(ordering) &&
                      table.records.back().loss_fraction == fraction && table.records.back().scenario == row.fields[2] &&
                      table.records.back().hour == hour;
    if (!same) {
      if (table.records.size() > 1 && table.records.back().unserved_mw_per_region.size() != table.regions.size())
        throw ParseError(source, row.line, "previous record has missing regions");
      ScenarioRecord rec;
      rec.ordering_index = static_cast<std::size_t>(ordering);
      rec.loss_fraction = fraction;
      rec.scenario = row.fields[2];
      rec.hour = hour;
      rec.status = status;
      table.records.push_back(std::move(rec));
    }
    auto& rec = table.records.back();
    if (rec.status != status) throw ParseError(source, row.line, "rows of one record disagree on status");
    const std::size_t pos = rec.unserved_mw_per_region.size();
    if (table.records.size() == 1) {
      table.regions.push_back(row.fields[4]);
    } else if (pos >= table.regions.size() || table.regions[pos] != row.fields[4]) {
      throw ParseError(source, row.line, "unexpected region '" + row.fields[4] + "'");
    }
    rec.unserved_mw_per_region.push_back(unserved);
    rec.total_unserved_mw += unserved;
  }
  if (table.records.size() > 1 && table.records.back().unserved_mw_per_region.size() != table.regions.size())
    throw ValidationError(source + ": last record has missing regions");
  return table;
}

ResultTable load_results(const std::filesystem::path& path) { return parse_results(csv::read_text(path), path.string()); }

}  // namespace gridrisk
