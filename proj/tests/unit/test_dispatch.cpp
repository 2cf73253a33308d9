#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "gridrisk/dispatch.hpp"
#include "gridrisk/error.hpp"
#include "networks.hpp"
#include "oracles.hpp"

using namespace gridrisk;
using testnet::bus;
using testnet::gen;
using testnet::line;

namespace {

const std::string kData = GRIDRISK_TEST_DATA;

std::vector<double> demand_on(const Grid& g, std::initializer_list<std::pair<const char*, double>> loads) {
  std::vector<double> d(g.buses().size(), 0.0);
  for (const auto& [id, mw] : loads) d[g.bus_index(id)] = mw;
  return d;
}

// Copper plate: a star of huge-rated lines; demand buses D0..D{k-1}, generators at the hub.
Grid copper_plate(const std::vector<double>& gen_mw, std::size_t demand_buses) {
  std::vector<Bus> buses{bus("HUB")};
  std::vector<Branch> branches;
  for (std::size_t i = 0; i < demand_buses; ++i) {
    const std::string id = "D" + std::to_string(i);
    buses.push_back(bus(id));
    branches.push_back(line("L" + std::to_string(i), "HUB", id, 100.0, 1e7));
  }
  std::vector<Generator> gens;
  for (std::size_t g = 0; g < gen_mw.size(); ++g) gens.push_back(gen("G" + std::to_string(g), "HUB", gen_mw[g]));
  return Grid(std::move(buses), std::move(branches), std::move(gens));
}

}  // namespace

TEST_CASE("distance costs: co-located generator and the additive floor") {
  const Grid g({bus("D1"), bus("X")}, {line("L", "D1", "X", 1)},
               {gen("G", "D1", 10), gen("I", "D1", 10, Technology::interconnector)});
  const auto d = demand_on(g, {{"D1", 5.0}});
  const auto mean = mean_hop_distance(g, d);
  CHECK(mean[0] == 0.0);
  CHECK(mean[1] == 0.0);
  const auto c = generator_distance_costs(g, d, 10.0);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 10.0);
  CHECK_THROWS_AS(generator_distance_costs(g, std::vector<double>{0, 0}), NoDemand);
}

TEST_CASE("distance costs on a four-bus path") {
  // A - B - C - D1, demand at the D1 end
  const Grid g({bus("A"), bus("B"), bus("C"), bus("D1")},
               {line("AB", "A", "B", 1), line("BC", "B", "C", 1), line("CD", "C", "D1", 1)},
               {gen("GA", "A", 1), gen("GB", "B", 1), gen("GC", "C", 1), gen("GD", "D1", 1)});
  const auto d = demand_on(g, {{"D1", 7.0}});
  CHECK(mean_hop_distance(g, d) == std::vector<double>{3, 2, 1, 0});
  CHECK(generator_distance_costs(g, d) == std::vector<double>{4, 3, 2, 1});

  // demand-weighted: 1 MW at A, 3 MW at D1 -> GA: (0*1 + 3*3)/4
  const auto d2 = demand_on(g, {{"A", 1.0}, {"D1", 3.0}});
  CHECK(mean_hop_distance(g, d2)[0] == doctest::Approx(9.0 / 4.0));
  CHECK(mean_hop_distance(g, d2)[3] == doctest::Approx(3.0 / 4.0));
}

TEST_CASE("impedance-weighted distances follow reactance") {
  const Grid g({bus("A"), bus("B"), bus("D1")}, {line("AB", "A", "B", 2), line("BD", "B", "D1", 4), line("AD", "A", "D1", 1)},
               {gen("GA", "A", 1)});
  const auto d = demand_on(g, {{"D1", 1.0}});
  // A->B->D1 costs 0.5 + 0.25 = 0.75 < direct 1.0
  CHECK(generator_distance_costs(g, d, 10.0, true)[0] == doctest::Approx(1.75));
  CHECK(generator_distance_costs(g, d, 10.0, false)[0] == 2.0);
}

TEST_CASE("two-bus redispatch") {
  const Grid g({bus("A"), bus("D1")}, {line("L", "A", "D1", 10, 60)}, {gen("G", "A", 100)});
  auto p = DispatchProblem::all_available(g, demand_on(g, {{"D1", 50.0}}));
  const auto s = redispatch(g, p);
  REQUIRE(s.status == DispatchStatus::feasible);
  CHECK(s.generator_output_mw[0] == doctest::Approx(50.0));
  CHECK(s.flow_solution.flows_mw[0] == doctest::Approx(50.0));
  CHECK(verify_dispatch(g, p, s).empty());

  p.demand_mw = demand_on(g, {{"D1", 80.0}});
  CHECK(redispatch(g, p).status == DispatchStatus::infeasible);
}

TEST_CASE("three-bus redispatch matches the vertex-enumeration oracle") {
  // Cheap local unit behind a weak line, expensive interconnector elsewhere.
  const Grid g({bus("A"), bus("B"), bus("D1")},
               {line("AB", "A", "B", 10, 500), line("AD", "A", "D1", 10, 60), line("BD", "B", "D1", 10, 500)},
               {gen("G", "A", 150), gen("I", "B", 200, Technology::interconnector)});
  auto p = DispatchProblem::all_available(g, demand_on(g, {{"D1", 120.0}}));
  const auto costs = generator_distance_costs(g, p.demand_mw, p.interconnector_penalty);
  CHECK(costs == std::vector<double>{2.0, 20.0});

  const auto s = redispatch(g, p);
  REQUIRE(s.status == DispatchStatus::feasible);
  CHECK(verify_dispatch(g, p, s).empty());

  const auto lp = angle_formulation(g, p, costs, default_slack_bus(g), 1.0);
  const auto ref = oracle::enumerate_vertices(lp);
  REQUIRE(ref.feasible);
  CHECK(std::abs(s.objective - ref.objective) <= 1e-8 * (1.0 + std::abs(ref.objective)));
  // flow AD = 2/3 gG + 1/3 gI binds at 60 with gG + gI = 120.
  CHECK(s.generator_output_mw[0] == doctest::Approx(60.0));
  CHECK(s.generator_output_mw[1] == doctest::Approx(60.0));
  CHECK(std::abs(s.flow_solution.flows_mw[1]) == doctest::Approx(60.0));
}

TEST_CASE("cutting-plane redispatch agrees with the angle formulation on the fixture") {
  const auto g = load_grid(kData + "/five_bus.csv");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 250.0);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = DispatchProblem::all_available(g, demand_on(g, {{"B4", u(rng)}, {"B5", u(rng)}}));
    const auto costs = generator_distance_costs(g, p.demand_mw, p.interconnector_penalty);
    const auto s = redispatch(g, p);
    const auto full = lp_solve(angle_formulation(g, p, costs, default_slack_bus(g)));
    if (full.status != LpStatus::optimal) {
      CHECK(s.status == DispatchStatus::infeasible);
      continue;
    }
    REQUIRE(s.status == DispatchStatus::feasible);
    CHECK(std::abs(s.objective - full.objective_value) <= 1e-7 * (1.0 + std::abs(full.objective_value)));
    CHECK(verify_dispatch(g, p, s).empty());
  }
}

TEST_CASE("cost scaling leaves the optimal dispatch unchanged") {
  const auto g = load_grid(kData + "/five_bus.csv");
  const auto p = DispatchProblem::all_available(g, demand_on(g, {{"B4", 150.0}, {"B5", 120.0}}));
  auto costs = generator_distance_costs(g, p.demand_mw, 10.0);
  const auto slack = default_slack_bus(g);
  const auto a = lp_solve(angle_formulation(g, p, costs, slack));
  for (auto& c : costs) c *= 7.5;
  const auto b = lp_solve(angle_formulation(g, p, costs, slack));
  REQUIRE(a.status == LpStatus::optimal);
  REQUIRE(b.status == LpStatus::optimal);
  CHECK(b.objective_value == doctest::Approx(7.5 * a.objective_value));
  for (std::size_t j = 0; j < 2; ++j) CHECK(a.x[j] == doctest::Approx(b.x[j]));
}

TEST_CASE("no shedding when capacity suffices") {
  const auto g = copper_plate({100, 100}, 3);
  const std::vector<std::size_t> removed{};
  const auto p = DispatchProblem::all_available(g, {0, 30, 30, 30});
  const auto s = dispatch_with_shedding(g, p, removed);
  CHECK(s.status == DispatchStatus::feasible);
  CHECK(s.total_shed() == 0.0);
}

TEST_CASE("copper-plate shedding follows energy balance") {
  // 40 MW available, 100 MW demand on one bus -> 60 MW shed
  const auto g = copper_plate({40, 60}, 1);
  const std::vector<std::size_t> removed{1};
  const auto p = DispatchProblem::all_available(g, {0, 100}, removed);
  const auto s = dispatch_with_shedding(g, p, removed);
  REQUIRE(s.status == DispatchStatus::feasible_with_shedding);
  CHECK(s.total_shed() == doctest::Approx(60.0));
  CHECK(verify_dispatch(g, p, s).empty());
}

TEST_CASE("copper-plate shedding over a grid of capacity and demand") {
  for (int ci = 1; ci <= 10; ++ci) {
    for (int di = 1; di <= 10; ++di) {
      const double capacity = 37.0 * ci;
      const double per_bus = 11.0 * di;
      const auto g = copper_plate({capacity, 1000.0}, 3);
      const std::vector<std::size_t> removed{1};
      const auto p = DispatchProblem::all_available(g, {0, per_bus, per_bus, per_bus}, removed);
      const auto s = dispatch_with_shedding(g, p, removed);
      const double expect = std::max(0.0, 3 * per_bus - capacity);
      CHECK(s.total_shed() >= expect - 1e-6);
      CHECK(s.total_shed() <= expect + 0.1 * per_bus + 1e-6);
      CHECK(verify_dispatch(g, p, s).empty());
    }
  }
}

TEST_CASE("shedding starts nearest the removed generator") {
  // D1 - X - D2 - Y - D3 - GR ; removed generator GR sits next to D3
  const Grid g({bus("D1"), bus("X"), bus("D2"), bus("Y"), bus("D3"), bus("GR")},
               {line("a", "D1", "X", 10, 1e6), line("b", "X", "D2", 10, 1e6), line("c", "D2", "Y", 10, 1e6),
                line("d", "Y", "D3", 10, 1e6), line("e", "D3", "GR", 10, 1e6)},
               {gen("G1", "X", 100), gen("G2", "GR", 100)});
  const std::vector<std::size_t> removed{1};
  const auto p = DispatchProblem::all_available(g, demand_on(g, {{"D1", 40}, {"D2", 40}, {"D3", 40}}), removed);
  const Dispatcher d(g);
  const auto order = d.shedding_order(p, removed);
  CHECK(order == std::vector<std::size_t>{4, 2, 0});
  const auto s = d.dispatch_with_shedding(p, removed);
  REQUIRE(s.status == DispatchStatus::feasible_with_shedding);
  CHECK(s.shed_mw[4] == doctest::Approx(20.0));
  CHECK(s.shed_mw[2] == 0.0);
  CHECK(s.shed_mw[0] == 0.0);
}

TEST_CASE("shedding relieves a binding line") {
  // Generator at A feeds D1 over a 60 MW line, no local supply at D1.
  const Grid g({bus("A"), bus("D1"), bus("D2")}, {line("L", "A", "D1", 10, 60), line("M", "A", "D2", 10, 1000)},
               {gen("G", "A", 500), gen("H", "D2", 50)});
  const std::vector<std::size_t> removed{1};
  const auto p = DispatchProblem::all_available(g, demand_on(g, {{"D1", 80.0}, {"D2", 10.0}}), removed);
  const auto s = dispatch_with_shedding(g, p, removed);
  REQUIRE(s.status == DispatchStatus::feasible_with_shedding);
  // D2 is nearest H and is fully shed first, then D1 drops in 8 MW steps to 56.
  CHECK(s.shed_mw[2] == doctest::Approx(10.0));
  CHECK(s.shed_mw[1] == doctest::Approx(24.0));
  CHECK(verify_dispatch(g, p, s).empty());
}

TEST_CASE("losing every generator sheds all demand") {
  const Grid g({bus("A"), bus("D1")}, {line("L", "A", "D1", 10, 60)}, {gen("G", "A", 100)});
  const std::vector<std::size_t> removed{0};
  auto p = DispatchProblem::all_available(g, demand_on(g, {{"D1", 50.0}}), removed);
  const auto s = dispatch_with_shedding(g, p, removed);
  CHECK(s.total_shed() == doctest::Approx(50.0));
  CHECK(s.total_output() == 0.0);
}

TEST_CASE("shed monotonicity under nested removal sets") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> mw(10.0, 80.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> gens(8);
    for (auto& v : gens) v = mw(rng);
    const auto g = copper_plate(gens, 4);
    const std::vector<double> demand{0, 60, 70, 50, 80};
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Dispatcher d(g);
    double previous = 0.0;
    for (std::size_t k = 0; k <= 8; ++k) {
      std::vector<std::size_t> removed(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
      const auto p = DispatchProblem::all_available(g, demand, removed);
      const auto s = d.dispatch_with_shedding(p, removed);
      CHECK(s.total_shed() >= previous - 1e-9);
      previous = s.total_shed();
    }
  }
}

TEST_CASE("every returned dispatch passes the independent check") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int shed_cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 4 + trial % 12;
    auto base = testnet::random_network(rng, n, n / 3);
    std::vector<Bus> buses = base.buses();
    std::vector<Branch> branches = base.branches();
    for (auto& b : branches) b.rating_mw = 20.0 + 80.0 * u(rng);
    std::vector<Generator> gens;
    for (std::size_t i = 0; i < n; i += 2)
      gens.push_back(gen("G" + std::to_string(i), buses[i].id, 20 + 60 * u(rng),
                         i % 6 == 4 ? Technology::interconnector : Technology::thermal));
    const Grid g(buses, branches, gens);
    std::vector<double> demand(n);
    for (auto& v : demand) v = 30.0 * u(rng);
    std::vector<std::size_t> removed;
    for (std::size_t k = 0; k < gens.size(); ++k)
      if (u(rng) < 0.3) removed.push_back(k);
    const auto p = DispatchProblem::all_available(g, demand, removed);
    const auto s = dispatch_with_shedding(g, p, removed);
    CHECK(verify_dispatch(g, p, s).empty());
    if (s.status == DispatchStatus::feasible_with_shedding) ++shed_cases;
  }
  CHECK(shed_cases > 5);
}

TEST_CASE("problem validation") {
  const Grid g({bus("A"), bus("D1")}, {line("L", "A", "D1", 10, 60)}, {gen("G", "A", 100)});
  auto p = DispatchProblem::all_available(g, {0, -1});
  CHECK_THROWS_AS(redispatch(g, p), ValidationError);
  p = DispatchProblem::all_available(g, {0, 10});
  const std::vector<std::size_t> removed{0};
  CHECK_THROWS_AS(dispatch_with_shedding(g, p, removed), ValidationError);
}
