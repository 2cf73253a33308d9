#pragma once

// DC power flow. Inputs and outputs are in MW; per-unit conversion on the
// grid's base_mva happens internally. Angles are in radians with the slack
// bus fixed at zero; the slack absorbs any injection imbalance.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridrisk/grid.hpp"
#include "gridrisk/numerics.hpp"

namespace gridrisk {

struct FlowSolution {
  std::vector<double> angles_rad;  // per bus
  std::vector<double> flows_mw;    // per branch, positive from -> to
};

struct LimitViolation {
  std::string branch_id;
  double flow_mw = 0.0;  // absolute value
  double rating_mw = 0.0;
  double overload_fraction = 0.0;  // |flow| / rating - 1
};

// Bus hosting the largest derated non-international capacity (ties: file order).
// Falls back to the first bus when there are no domestic generators.
std::string default_slack_bus(const Grid& grid);

// Reduced (n-1)x(n-1) susceptance matrix in per unit, slack row/column
// removed, remaining buses in file order. Parallel branches add up.
// Throws DisconnectedGrid if the network is not a single component.
DenseMatrix build_susceptance_matrix(const Grid& grid, std::string_view slack_bus);

FlowSolution dc_power_flow(const Grid& grid, std::span<const double> injections_mw, std::string_view slack_bus);

// Parallel branches between the same bus pair form one corridor whose rating
// is the sum of member ratings; a violated corridor is reported once, under
// its lowest branch id, with the corridor flow and combined rating.
std::vector<LimitViolation> check_limits(const Grid& grid, const FlowSolution& flows);

// Branches grouped by unordered bus pair.
struct Corridor {
  std::vector<std::size_t> branches;
  std::vector<double> orientation;  // +1 if the branch runs in the corridor's direction
  std::size_t from = 0;
  std::size_t to = 0;
  double rating_mw = 0.0;
  std::string label;  // lowest member branch id
};

std::vector<Corridor> corridors(const Grid& grid);

// Injection-to-flow sensitivities for a fixed topology, factored once and
// reused across many dispatches. Thread-safe after construction.
class SensitivityModel {
 public:
  SensitivityModel(const Grid& grid, std::string_view slack_bus);

  std::size_t slack_index() const noexcept { return slack_; }
  const std::vector<Corridor>& corridors() const noexcept { return corridors_; }
  // MW of corridor flow per MW injected at a bus (slack column is zero).
  double corridor_factor(std::size_t corridor, std::size_t bus) const noexcept { return ptdf_(corridor, bus); }
  std::vector<double> corridor_flows(std::span<const double> injections_mw) const;
  FlowSolution solve(std::span<const double> injections_mw) const;

 private:
  double base_mva_;
  std::vector<std::size_t> branch_from_;
  std::vector<std::size_t> branch_to_;
  std::vector<double> susceptance_;
  std::size_t slack_;
  std::vector<std::size_t> reduced_;  // bus -> reduced index, npos for slack
  LuFactorization lu_;
  std::vector<Corridor> corridors_;
  DenseMatrix ptdf_;  // corridors x buses
};

}  // namespace gridrisk
