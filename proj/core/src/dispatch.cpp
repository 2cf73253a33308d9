#include "gridrisk/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

void check_problem(const Grid& grid, const DispatchProblem& problem) {
  if (problem.demand_mw.size() != grid.buses().size()) throw ValidationError("demand vector length != bus count");
  if (problem.available.size() != grid.generators().size())
    throw ValidationError("availability vector length != generator count");
  for (double d : problem.demand_mw)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ValidationError("demand must be finite and >= 0");
  if (!(problem.interconnector_penalty > 0.0)) throw ValidationError("interconnector penalty must be > 0");
}

// Shortest-path lengths from one bus with branch weight 1 / susceptance.
std::vector<double> reactance_distances(const Grid& grid, std::size_t source) {
  const std::size_t n = grid.buses().size();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    const double w = 1.0 / grid.branches()[k].susceptance_pu;
    adj[grid.branch_from(k)].emplace_back(grid.branch_to(k), w);
    adj[grid.branch_to(k)].emplace_back(grid.branch_from(k), w);
  }
  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        queue.emplace(dist[v], v);
      }
    }
  }
  return dist;
}

// Demand-weighted mean distance per generator given a bus-to-bus distance function.
template <class Dist>
std::vector<double> weighted_mean_distance(const Grid& grid, std::span<const double> demand, Dist&& dist_from) {
  if (demand.size() != grid.buses().size()) throw ValidationError("demand vector length != bus count");
  const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(total > 0.0)) throw NoDemand("all demand is zero");
  const std::size_t n = grid.buses().size();
  std::vector<std::vector<double>> cache(n);
  std::vector<double> out(grid.generators().size());
  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto bus = grid.generator_bus(g);
    if (cache[bus].empty()) cache[bus] = dist_from(bus);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (demand[i] <= 0.0) continue;
      if (!std::isfinite(cache[bus][i])) throw DisconnectedGrid("demand bus unreachable from generator " + grid.generators()[g].id);
      s += demand[i] * cache[bus][i];
    }
    out[g] = s / total;
  }
  return out;
}

std::vector<double> hop_row(const Grid& grid, std::size_t bus) {
  const auto hops = hop_distances(grid, bus);
  std::vector<double> out(hops.size());
  for (std::size_t i = 0; i < hops.size(); ++i) out[i] = hops[i] < 0 ? kInf : hops[i];
  return out;
}

std::vector<double> apply_penalty(const Grid& grid, std::vector<double> mean, double penalty) {
  for (std::size_t g = 0; g < mean.size(); ++g) {
    mean[g] += 1.0;
    if (grid.generators()[g].is_international()) mean[g] *= penalty;
  }
  return mean;
}

bool energy_infeasible(double demand, double capacity) {
  return demand > capacity + 1e-9 * std::max(1.0, demand);
}

}  // namespace

DispatchProblem DispatchProblem::all_available(const Grid& grid, std::vector<double> demand_mw,
                                               std::span<const std::size_t> removed) {
  DispatchProblem p;
  p.demand_mw = std::move(demand_mw);
  p.available.assign(grid.generators().size(), 1);
  for (auto g : removed) {
    if (g >= p.available.size()) throw ValidationError("removed generator index out of range");
    p.available[g] = 0;
  }
  return p;
}

std::string_view to_string(DispatchStatus status) {
  switch (status) {
    case DispatchStatus::feasible: return "feasible";
    case DispatchStatus::feasible_with_shedding: return "feasible_with_shedding";
    case DispatchStatus::infeasible: return "infeasible";
  }
  return "?";
}

double DispatchSolution::total_shed() const { return std::accumulate(shed_mw.begin(), shed_mw.end(), 0.0); }

double DispatchSolution::total_output() const {
  return std::accumulate(generator_output_mw.begin(), generator_output_mw.end(), 0.0);
}

std::vector<double> mean_hop_distance(const Grid& grid, std::span<const double> demand_mw) {
  return weighted_mean_distance(grid, demand_mw, [&](std::size_t bus) { return hop_row(grid, bus); });
}

std::vector<double> generator_distance_costs(const Grid& grid, std::span<const double> demand_mw,
                                             double interconnector_penalty, bool impedance_weighted) {
  if (impedance_weighted) {
    auto mean = weighted_mean_distance(grid, demand_mw, [&](std::size_t bus) { return reactance_distances(grid, bus); });
    return apply_penalty(grid, std::move(mean), interconnector_penalty);
  }
  return apply_penalty(grid, mean_hop_distance(grid, demand_mw), interconnector_penalty);
}

Dispatcher::Dispatcher(Grid grid, DispatchOptions options)
    : grid_(std::move(grid)),
      options_(std::move(options)),
      model_(grid_, options_.slack_bus.empty() ? default_slack_bus(grid_) : options_.slack_bus),
      n_(grid_.buses().size()),
      hops_(n_ * n_) {
  if (!(options_.shed_step > 0.0 && options_.shed_step <= 1.0)) throw ValidationError("shed_step must be in (0, 1]");
  for (std::size_t i = 0; i < n_; ++i) {
    const auto row = hop_distances(grid_, i);
    std::copy(row.begin(), row.end(), hops_.begin() + static_cast<std::ptrdiff_t>(i * n_));
  }
}

std::vector<double> Dispatcher::costs(std::span<const double> demand_mw, double interconnector_penalty) const {
  if (options_.impedance_weighted_distance)
    return generator_distance_costs(grid_, demand_mw, interconnector_penalty, true);
  auto mean = weighted_mean_distance(grid_, demand_mw, [&](std::size_t bus) {
    std::vector<double> row(n_);
    for (std::size_t i = 0; i < n_; ++i) row[i] = hops(bus, i);
    return row;
  });
  return apply_penalty(grid_, std::move(mean), interconnector_penalty);
}

DispatchSolution Dispatcher::solve(const DispatchProblem& problem, std::span<const double> demand,
                                   std::span<const double> costs) const {
  const auto& gens = grid_.generators();
  DispatchSolution out;
  out.generator_output_mw.assign(gens.size(), 0.0);
  out.shed_mw.assign(n_, 0.0);

  std::vector<std::size_t> active;
  double capacity = 0.0;
  for (std::size_t g = 0; g < gens.size(); ++g) {
    if (problem.available[g] && gens[g].derated_mw() > 0.0) {
      active.push_back(g);
      capacity += gens[g].derated_mw();
    }
  }
  const double total = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (energy_infeasible(total, capacity)) return out;

  const auto& cors = model_.corridors();
  // Corridor flows from demand alone (withdrawals are negative injections).
  std::vector<double> neg_demand(n_);
  for (std::size_t i = 0; i < n_; ++i) neg_demand[i] = -demand[i];
  const auto base_flow = model_.corridor_flows(neg_demand);

  auto lp = LinearProgram::with_variables(active.size());
  for (std::size_t j = 0; j < active.size(); ++j) {
    lp.objective[j] = costs[active[j]];
    lp.upper[j] = gens[active[j]].derated_mw();
  }
  lp.add_equality(std::vector<double>(active.size(), 1.0), total);

  std::vector<char> cut(cors.size() * 2, 0);
  std::vector<double> x(active.size(), 0.0);
  std::vector<double> row(active.size());
  for (std::size_t round = 0;; ++round) {
    if (!active.empty()) {
      const auto sol = lp_solve(lp, options_.lp);
      ++out.lp_solves;
      if (sol.status != LpStatus::optimal) return out;
      x = sol.x;
      out.objective = sol.objective_value;
    } else if (total > 1e-9) {
      return out;
    }

    bool added = false;
    for (std::size_t c = 0; c < cors.size(); ++c) {
      double flow = base_flow[c];
      for (std::size_t j = 0; j < active.size(); ++j)
        flow += model_.corridor_factor(c, grid_.generator_bus(active[j])) * x[j];
      const double rating = cors[c].rating_mw;
      if (std::abs(flow) <= rating * (1.0 + 1e-10)) continue;
      const int side = flow > 0 ? 0 : 1;
      if (cut[2 * c + side]) continue;  // already constrained; residual is rounding
      cut[2 * c + side] = 1;
      const double sign = side == 0 ? 1.0 : -1.0;
      for (std::size_t j = 0; j < active.size(); ++j)
        row[j] = sign * model_.corridor_factor(c, grid_.generator_bus(active[j]));
      lp.add_inequality(row, rating - sign * base_flow[c]);
      added = true;
    }
    if (!added) break;
    if (round > 2 * cors.size() + 1) throw NumericalBreakdown("redispatch cut loop did not converge");
  }

  std::vector<double> injections(neg_demand);
  for (std::size_t j = 0; j < active.size(); ++j) {
    out.generator_output_mw[active[j]] = x[j];
    injections[grid_.generator_bus(active[j])] += x[j];
  }
  out.flow_solution = model_.solve(injections);
  out.status = DispatchStatus::feasible;
  return out;
}

DispatchSolution Dispatcher::redispatch(const DispatchProblem& problem) const {
  check_problem(grid_, problem);
  const auto c = costs(problem.demand_mw, problem.interconnector_penalty);
  return solve(problem, problem.demand_mw, c);
}

std::vector<std::size_t> Dispatcher::shedding_order(const DispatchProblem& problem,
                                                    std::span<const std::size_t> removed) const {
  constexpr int kFar = std::numeric_limits<int>::max();
  std::vector<std::pair<int, std::size_t>> keyed;
  for (std::size_t i = 0; i < n_; ++i) {
    if (problem.demand_mw[i] <= 0.0) continue;
    int best = kFar;
    for (auto g : removed) {
      const int h = hops(grid_.generator_bus(g), i);
      if (h >= 0) best = std::min(best, h);
    }
    keyed.emplace_back(best, i);
  }
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return grid_.buses()[a.second].id < grid_.buses()[b.second].id;
  });
  std::vector<std::size_t> out;
  for (const auto& [h, i] : keyed) out.push_back(i);
  return out;
}

DispatchSolution Dispatcher::dispatch_with_shedding(const DispatchProblem& problem,
                                                    std::span<const std::size_t> removed) const {
  check_problem(grid_, problem);
  for (auto g : removed) {
    if (g >= problem.available.size()) throw ValidationError("removed generator index out of range");
    if (problem.available[g]) throw ValidationError("removed generator " + grid_.generators()[g].id + " is available");
  }
  const auto c = costs(problem.demand_mw, problem.interconnector_penalty);
  auto first = solve(problem, problem.demand_mw, c);
  if (first.status == DispatchStatus::feasible) return first;
  std::size_t solves = first.lp_solves;

  double capacity = 0.0;
  for (std::size_t g = 0; g < grid_.generators().size(); ++g)
    if (problem.available[g]) capacity += std::max(0.0, grid_.generators()[g].derated_mw());

  const auto order = shedding_order(problem, removed);
  const auto steps = static_cast<int>(std::ceil(1.0 / options_.shed_step - 1e-9));
  std::vector<double> demand = problem.demand_mw;
  double total = std::accumulate(demand.begin(), demand.end(), 0.0);
  for (auto bus : order) {
    const double original = problem.demand_mw[bus];
    for (int s = 1; s <= steps; ++s) {
      const double before = demand[bus];
      demand[bus] = s == steps ? 0.0 : std::max(0.0, original * (1.0 - s * options_.shed_step));
      total -= before - demand[bus];
      // Rounds that cannot balance energy are infeasible for any network; skip the LP.
      if (energy_infeasible(total, capacity)) continue;
      auto sol = solve(problem, demand, c);
      solves += sol.lp_solves;
      if (sol.status == DispatchStatus::feasible) {
        for (std::size_t i = 0; i < n_; ++i) sol.shed_mw[i] = problem.demand_mw[i] - demand[i];
        sol.status = DispatchStatus::feasible_with_shedding;
        sol.lp_solves = solves;
        return sol;
      }
    }
  }
  throw Unstable("no feasible dispatch even with all demand shed");
}

DispatchSolution redispatch(const Grid& grid, const DispatchProblem& problem, const DispatchOptions& options) {
  return Dispatcher(grid, options).redispatch(problem);
}

DispatchSolution dispatch_with_shedding(const Grid& grid, const DispatchProblem& problem,
                                        std::span<const std::size_t> removed, const DispatchOptions& options) {
  return Dispatcher(grid, options).dispatch_with_shedding(problem, removed);
}

LinearProgram angle_formulation(const Grid& grid, const DispatchProblem& problem, std::span<const double> costs,
                                std::string_view slack_bus, double angle_bound) {
  check_problem(grid, problem);
  const std::size_t n = grid.buses().size();
  const auto slack = grid.bus_index(slack_bus);
  std::vector<std::size_t> active;
  for (std::size_t g = 0; g < grid.generators().size(); ++g)
    if (problem.available[g]) active.push_back(g);
  const std::size_t ng = active.size();
  auto lp = LinearProgram::with_variables(ng + n);
  for (std::size_t j = 0; j < ng; ++j) {
    lp.objective[j] = costs[active[j]];
    lp.upper[j] = std::max(0.0, grid.generators()[active[j]].derated_mw());
  }
  for (std::size_t i = 0; i < n; ++i) {
    lp.lower[ng + i] = i == slack ? 0.0 : -angle_bound;
    lp.upper[ng + i] = i == slack ? 0.0 : angle_bound;
  }
  const double base = grid.base_mva();
  // generation at bus - base * sum_j B_ij theta_j = demand
  DenseMatrix balance(n, ng + n);
  for (std::size_t j = 0; j < ng; ++j) balance(grid.generator_bus(active[j]), j) += 1.0;
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    const double s = base * grid.branches()[k].susceptance_pu;
    const auto f = grid.branch_from(k);
    const auto t = grid.branch_to(k);
    balance(f, ng + f) -= s;
    balance(f, ng + t) += s;
    balance(t, ng + t) -= s;
    balance(t, ng + f) += s;
  }
  for (std::size_t i = 0; i < n; ++i) lp.add_equality(balance.row(i), problem.demand_mw[i]);
  for (const auto& c : corridors(grid)) {
    std::vector<double> row(ng + n, 0.0);
    for (std::size_t m = 0; m < c.branches.size(); ++m) {
      const auto k = c.branches[m];
      const double s = c.orientation[m] * base * grid.branches()[k].susceptance_pu;
      row[ng + grid.branch_from(k)] += s;
      row[ng + grid.branch_to(k)] -= s;
    }
    lp.add_inequality(row, c.rating_mw);
    for (auto& v : row) v = -v;
    lp.add_inequality(row, c.rating_mw);
  }
  return lp;
}

std::vector<std::string> verify_dispatch(const Grid& grid, const DispatchProblem& problem,
                                         const DispatchSolution& solution, double tolerance_mw) {
  std::vector<std::string> issues;
  const std::size_t n = grid.buses().size();
  const auto& gens = grid.generators();
  if (solution.status == DispatchStatus::infeasible) {
    issues.emplace_back("status is infeasible");
    return issues;
  }
  if (solution.generator_output_mw.size() != gens.size() || solution.shed_mw.size() != n) {
    issues.emplace_back("solution vectors have the wrong length");
    return issues;
  }
  double served = 0.0, output = 0.0, shed = 0.0;
  std::vector<double> injections(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = solution.shed_mw[i];
    if (s < -tolerance_mw || s > problem.demand_mw[i] + tolerance_mw)
      issues.push_back("shed out of range at bus " + grid.buses()[i].id);
    served += problem.demand_mw[i] - s;
    shed += s;
    injections[i] -= problem.demand_mw[i] - s;
  }
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const double p = solution.generator_output_mw[g];
    if (!problem.available[g] && p != 0.0) issues.push_back("unavailable generator " + gens[g].id + " produces");
    if (p < -tolerance_mw || p > gens[g].derated_mw() + tolerance_mw)
      issues.push_back("output out of range for " + gens[g].id);
    output += p;
    injections[grid.generator_bus(g)] += p;
  }
  if (std::abs(output - served) > tolerance_mw) issues.emplace_back("generation does not match served demand");
  if (solution.status == DispatchStatus::feasible && shed > tolerance_mw)
    issues.emplace_back("status feasible but demand was shed");
  const auto slack = default_slack_bus(grid);
  const auto flows = dc_power_flow(grid, injections, slack);
  for (const auto& v : check_limits(grid, flows))
    issues.push_back("branch " + v.branch_id + " overloaded by " + std::to_string(v.overload_fraction));
  if (solution.flow_solution.flows_mw.size() == flows.flows_mw.size()) {
    for (std::size_t k = 0; k < flows.flows_mw.size(); ++k) {
      if (std::abs(flows.flows_mw[k] - solution.flow_solution.flows_mw[k]) >
          tolerance_mw * std::max(1.0, std::abs(flows.flows_mw[k]))) {
        issues.push_back("reported flow differs on " + grid.branches()[k].id);
      }
    }
  } else {
    issues.emplace_back("flow solution has the wrong length");
  }
  return issues;
}

}  // namespace gridrisk
