#pragma once

// Optimized DC redispatch after generator loss, with local load shedding when
// no feasible dispatch exists.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gridrisk/grid.hpp"
#include "gridrisk/numerics.hpp"
#include "gridrisk/powerflow.hpp"

namespace gridrisk {

struct DispatchOptions {
  double interconnector_penalty = 10.0;
  // Fraction of a bus's original demand removed per shedding round.
  double shed_step = 0.1;
  // Path distance for the cost vector: hop count, or shortest path weighted by
  // per-unit reactance (1 / susceptance).
  bool impedance_weighted_distance = false;
  std::string slack_bus;  // empty: default_slack_bus()
  LpOptions lp;
};

struct DispatchProblem {
  std::vector<double> demand_mw;  // per bus, >= 0
  std::vector<char> available;    // per generator
  double interconnector_penalty = 10.0;

  // Every generator available except the listed ones.
  static DispatchProblem all_available(const Grid& grid, std::vector<double> demand_mw,
                                       std::span<const std::size_t> removed = {});
};

enum class DispatchStatus { feasible, feasible_with_shedding, infeasible };
std::string_view to_string(DispatchStatus status);

struct DispatchSolution {
  DispatchStatus status = DispatchStatus::infeasible;
  std::vector<double> generator_output_mw;  // per generator, 0 when unavailable
  FlowSolution flow_solution;
  std::vector<double> shed_mw;  // per bus
  double objective = 0.0;
  std::size_t lp_solves = 0;

  double total_shed() const;
  double total_output() const;
};

// Demand-weighted mean hop distance from every generator's bus to the demand
// buses. Throws NoDemand when all demand is zero.
std::vector<double> mean_hop_distance(const Grid& grid, std::span<const double> demand_mw);

// Per-generator cost: (1 + mean path distance), times the interconnector
// penalty for international generators.
std::vector<double> generator_distance_costs(const Grid& grid, std::span<const double> demand_mw,
                                             double interconnector_penalty = 10.0,
                                             bool impedance_weighted = false);

// Holds the factored network and all-pairs hop distances so that many
// dispatches on the same topology are cheap. Immutable and thread-safe.
class Dispatcher {
 public:
  explicit Dispatcher(Grid grid, DispatchOptions options = {});

  const Grid& grid() const noexcept { return grid_; }
  const DispatchOptions& options() const noexcept { return options_; }
  const SensitivityModel& network() const noexcept { return model_; }
  int hops(std::size_t a, std::size_t b) const noexcept { return hops_[a * n_ + b]; }

  std::vector<double> costs(std::span<const double> demand_mw, double interconnector_penalty) const;

  // Minimum-cost dispatch without shedding; status infeasible when none exists.
  DispatchSolution redispatch(const DispatchProblem& problem) const;

  // Redispatch, shedding demand nearest the removed generators first when
  // needed. Throws Unstable if shedding everything still leaves no dispatch.
  DispatchSolution dispatch_with_shedding(const DispatchProblem& problem, std::span<const std::size_t> removed) const;

  // Demand buses in shedding order for a removal set.
  std::vector<std::size_t> shedding_order(const DispatchProblem& problem, std::span<const std::size_t> removed) const;

 private:
  DispatchSolution solve(const DispatchProblem& problem, std::span<const double> demand,
                         std::span<const double> costs) const;

  Grid grid_;
  DispatchOptions options_;
  SensitivityModel model_;
  std::size_t n_;
  std::vector<int> hops_;
};

DispatchSolution redispatch(const Grid& grid, const DispatchProblem& problem, const DispatchOptions& options = {});
DispatchSolution dispatch_with_shedding(const Grid& grid, const DispatchProblem& problem,
                                        std::span<const std::size_t> removed, const DispatchOptions& options = {});

// The redispatch LP written out in full with generator outputs and bus angles
// as variables (angles bounded to +-angle_bound rad, slack fixed at 0).
// Variable order: available generators in grid order, then one angle per bus.
LinearProgram angle_formulation(const Grid& grid, const DispatchProblem& problem, std::span<const double> costs,
                                std::string_view slack_bus, double angle_bound = kInf);

// Checks every DispatchSolution invariant from scratch (balance, bounds,
// shedding range, and a fresh DC power flow against branch ratings).
// Returns a description of each violation; empty means valid.
std::vector<std::string> verify_dispatch(const Grid& grid, const DispatchProblem& problem,
                                         const DispatchSolution& solution, double tolerance_mw = 1e-6);

}  // namespace gridrisk
