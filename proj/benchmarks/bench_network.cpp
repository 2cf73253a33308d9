#include <benchmark/benchmark.h>

#include "gridrisk/demand.hpp"
#include "gridrisk/dispatch.hpp"
#include "gridrisk/failure_sim.hpp"
#include "gridrisk/powerflow.hpp"
#include "gridrisk/synthetic.hpp"

using namespace gridrisk;

namespace {

struct GbCase {
  Fixture fixture = make_gb_like_fixture(1);
  Grid grid = calibrate_ratings(fixture.grid, fixture.current);
  std::size_t peak = fixture.current.hour_position(national_peak_hour(fixture.current));
  std::vector<double> demand = bus_demand(grid, fixture.current, peak);
};

const GbCase& gb() {
  static const GbCase c;
  return c;
}

void BM_DcPowerFlow(benchmark::State& state) {
  const auto& c = gb();
  std::vector<double> p(c.demand.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] = -c.demand[i]);
  p[c.grid.bus_index(default_slack_bus(c.grid))] -= total;
  for (auto _ : state) benchmark::DoNotOptimize(dc_power_flow(c.grid, p, default_slack_bus(c.grid)));
}
BENCHMARK(BM_DcPowerFlow);

void BM_SensitivityModel(benchmark::State& state) {
  const auto& c = gb();
  for (auto _ : state) benchmark::DoNotOptimize(SensitivityModel(c.grid, default_slack_bus(c.grid)));
}
BENCHMARK(BM_SensitivityModel);

// Dispatch after losing a growing share of domestic capacity.
void BM_DispatchWithShedding(benchmark::State& state) {
  const auto& c = gb();
  const Dispatcher dispatcher(c.grid);
  const auto order = generate_ordering(c.grid, 1, 0);
  const auto removed = removal_set(order, c.grid, static_cast<double>(state.range(0)) / 100.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(dispatch_hour(dispatcher, c.fixture.current, c.peak, removed, 10.0));
}
BENCHMARK(BM_DispatchWithShedding)->Arg(0)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace
