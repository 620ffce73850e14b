// Chain engine scaling: the mask table doubles per window step, so runtime
// should roughly double from one M to the next on a fixed grid.
#include <benchmark/benchmark.h>

#include "mavg/engine_bc.hpp"
#include "mavg/models.hpp"

namespace {

void bc_price(benchmark::State& state) {
  const mavg::BlackScholesParams params{100.0, 0.05, 0.3};
  const mavg::OptionSpec opt{0.2, 50, static_cast<int>(state.range(0))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(mavg::price_bc(opt, params).price);
  }
}

}  // namespace

BENCHMARK(bc_price)->DenseRange(12, 22, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
