#include <benchmark/benchmark.h>

#include <random>

#include "gridrisk/numerics.hpp"

using namespace gridrisk;

namespace {

// Dense random LP with a known feasible point at x = 1.
LinearProgram random_lp(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto lp = LinearProgram::with_variables(n);
  for (auto& c : lp.objective) c = u(rng);
  for (std::size_t j = 0; j < n; ++j) {
    lp.lower[j] = 0.0;
    lp.upper[j] = 10.0;
  }
  std::vector<double> row(n);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (auto& v : row) s += (v = u(rng));
    lp.add_inequality(row, s + 1.0);
  }
  return lp;
}

void BM_LpSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto lp = random_lp(n, n, 7);
  for (auto _ : state) benchmark::DoNotOptimize(lp_solve(lp));
}
BENCHMARK(BM_LpSolve)->Arg(10)->Arg(40)->Arg(120);

void BM_LuSolve(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = u(rng);
    a(i, i) += static_cast<double>(n);
  }
  std::vector<double> b(n, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(lu_solve(a, b));
}
BENCHMARK(BM_LuSolve)->Arg(50)->Arg(200);

}  // namespace
