#include "gridrisk/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gridrisk/error.hpp"

namespace gridrisk {
namespace {

constexpr std::size_t kNpos = static_cast<std::size_t>(-1);

std::vector<std::size_t> reduced_indices(std::size_t n, std::size_t slack) {
  std::vector<std::size_t> reduced(n, kNpos);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != slack) reduced[i] = next++;
  return reduced;
}

void require_connected(const Grid& grid) {
  const auto report = validate_connectivity(grid);
  if (report.component_count != 1) {
    throw DisconnectedGrid("power flow needs a connected network; found " + std::to_string(report.component_count) +
                           " components");
  }
}

DenseMatrix assemble(const Grid& grid, std::size_t slack) {
  const std::size_t n = grid.buses().size();
  const auto reduced = reduced_indices(n, slack);
  DenseMatrix b(n - 1, n - 1);
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    const double s = grid.branches()[k].susceptance_pu;
    const auto i = reduced[grid.branch_from(k)];
    const auto j = reduced[grid.branch_to(k)];
    if (i != kNpos) b(i, i) += s;
    if (j != kNpos) b(j, j) += s;
    if (i != kNpos && j != kNpos) {
      b(i, j) -= s;
      b(j, i) -= s;
    }
  }
  return b;
}

}  // namespace

std::string default_slack_bus(const Grid& grid) {
  if (grid.buses().empty()) throw ValidationError("grid has no buses");
  std::vector<double> capacity(grid.buses().size(), 0.0);
  for (std::size_t g = 0; g < grid.generators().size(); ++g) {
    const auto& gen = grid.generators()[g];
    if (!gen.is_international()) capacity[grid.generator_bus(g)] += gen.derated_mw();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < capacity.size(); ++i)
    if (capacity[i] > capacity[best]) best = i;
  return grid.buses()[best].id;
}

DenseMatrix build_susceptance_matrix(const Grid& grid, std::string_view slack_bus) {
  const auto slack = grid.bus_index(slack_bus);
  require_connected(grid);
  return assemble(grid, slack);
}

FlowSolution dc_power_flow(const Grid& grid, std::span<const double> injections_mw, std::string_view slack_bus) {
  const std::size_t n = grid.buses().size();
  if (injections_mw.size() != n) throw ValidationError("injection vector length != bus count");
  for (double p : injections_mw)
    if (!std::isfinite(p)) throw ValidationError("injections must be finite");
  const auto slack = grid.bus_index(slack_bus);
  const auto b = build_susceptance_matrix(grid, slack_bus);
  const auto reduced = reduced_indices(n, slack);

  std::vector<double> rhs(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (reduced[i] != kNpos) rhs[reduced[i]] = injections_mw[i] / grid.base_mva();
  const auto theta = n > 1 ? lu_solve(b, rhs) : std::vector<double>{};

  FlowSolution out;
  out.angles_rad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (reduced[i] != kNpos) out.angles_rad[i] = theta[reduced[i]];
  out.flows_mw.resize(grid.branches().size());
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    out.flows_mw[k] = grid.base_mva() * grid.branches()[k].susceptance_pu *
                      (out.angles_rad[grid.branch_from(k)] - out.angles_rad[grid.branch_to(k)]);
  }
  return out;
}

std::vector<Corridor> corridors(const Grid& grid) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> by_pair;
  std::vector<Corridor> out;
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    const auto from = grid.branch_from(k);
    const auto to = grid.branch_to(k);
    const auto key = std::minmax(from, to);
    auto [it, inserted] = by_pair.emplace(key, out.size());
    if (inserted) {
      Corridor c;
      c.from = from;
      c.to = to;
      c.label = grid.branches()[k].id;
      out.push_back(std::move(c));
    }
    Corridor& c = out[it->second];
    c.branches.push_back(k);
    c.orientation.push_back(from == c.from ? 1.0 : -1.0);
    c.rating_mw += grid.branches()[k].rating_mw;
    c.label = std::min(c.label, grid.branches()[k].id);
  }
  return out;
}

std::vector<LimitViolation> check_limits(const Grid& grid, const FlowSolution& flows) {
  if (flows.flows_mw.size() != grid.branches().size()) throw ValidationError("flow vector does not match grid");
  std::vector<LimitViolation> out;
  for (const auto& c : corridors(grid)) {
    double flow = 0.0;
    for (std::size_t m = 0; m < c.branches.size(); ++m) flow += c.orientation[m] * flows.flows_mw[c.branches[m]];
    const double magnitude = std::abs(flow);
    if (magnitude > c.rating_mw * (1.0 + 1e-9)) {
      out.push_back({c.label, magnitude, c.rating_mw, magnitude / c.rating_mw - 1.0});
    }
  }
  return out;
}

SensitivityModel::SensitivityModel(const Grid& grid, std::string_view slack_bus)
    : base_mva_(grid.base_mva()),
      slack_(grid.bus_index(slack_bus)),
      reduced_(reduced_indices(grid.buses().size(), slack_)),
      lu_(build_susceptance_matrix(grid, slack_bus)),
      corridors_(gridrisk::corridors(grid)) {
  const std::size_t n = grid.buses().size();
  for (std::size_t k = 0; k < grid.branches().size(); ++k) {
    branch_from_.push_back(grid.branch_from(k));
    branch_to_.push_back(grid.branch_to(k));
    susceptance_.push_back(grid.branches()[k].susceptance_pu);
  }
  const auto x = lu_.inverse();  // d(theta) per unit of per-unit injection
  ptdf_ = DenseMatrix(corridors_.size(), n);
  for (std::size_t c = 0; c < corridors_.size(); ++c) {
    const auto& cor = corridors_[c];
    for (std::size_t bus = 0; bus < n; ++bus) {
      const auto col = reduced_[bus];
      if (col == kNpos) continue;
      double factor = 0.0;
      for (std::size_t m = 0; m < cor.branches.size(); ++m) {
        const auto k = cor.branches[m];
        const auto i = reduced_[branch_from_[k]];
        const auto j = reduced_[branch_to_[k]];
        const double ti = i == kNpos ? 0.0 : x(i, col);
        const double tj = j == kNpos ? 0.0 : x(j, col);
        factor += cor.orientation[m] * susceptance_[k] * (ti - tj);
      }
      ptdf_(c, bus) = factor;
    }
  }
}

std::vector<double> SensitivityModel::corridor_flows(std::span<const double> injections_mw) const {
  return ptdf_.multiply(injections_mw);
}

FlowSolution SensitivityModel::solve(std::span<const double> injections_mw) const {
  const std::size_t n = reduced_.size();
  if (injections_mw.size() != n) throw ValidationError("injection vector length != bus count");
  std::vector<double> rhs(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    if (reduced_[i] != kNpos) rhs[reduced_[i]] = injections_mw[i] / base_mva_;
  const auto theta = n > 1 ? lu_.solve(rhs) : std::vector<double>{};
  FlowSolution out;
  out.angles_rad.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (reduced_[i] != kNpos) out.angles_rad[i] = theta[reduced_[i]];
  out.flows_mw.resize(susceptance_.size());
  for (std::size_t k = 0; k < susceptance_.size(); ++k) {
    out.flows_mw[k] =
        base_mva_ * susceptance_[k] * (out.angles_rad[branch_from_[k]] - out.angles_rad[branch_to_[k]]);
  }
  return out;
}

}  // namespace gridrisk
