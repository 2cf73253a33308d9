#include <benchmark/benchmark.h>

#include "gridrisk/mria.hpp"
#include "gridrisk/synthetic.hpp"

using namespace gridrisk;

namespace {

void BM_AssessImpact(benchmark::State& state) {
  const auto fixture = make_gb_like_fixture(1);
  const auto& model = fixture.economy;
  std::vector<double> per_region(model.nr(), 0.0);
  per_region[0] = static_cast<double>(state.range(0)) / 100.0;
  const auto shock = CapacityShock::uniform(model, per_region);
  for (auto _ : state) benchmark::DoNotOptimize(assess_impact(model, shock));
}
BENCHMARK(BM_AssessImpact)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
