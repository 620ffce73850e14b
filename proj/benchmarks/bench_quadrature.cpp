// Quadrature costs: rule construction (cached after the first call) and the
// engine's inner backup step at realistic orders.
#include <benchmark/benchmark.h>

#include <cmath>

#include "mavg/engine_gprghq.hpp"
#include "mavg/models.hpp"
#include "mavg/quadrature.hpp"
#include "mavg/surrogate.hpp"

namespace {

void gh_expectation(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mavg::quad::gh_expect(
        [](double z) { return std::max(0.0, std::exp(0.2 * z) - 1.0); }, 0.0, 1.0,
        order));
  }
}

void backup_step(benchmark::State& state) {
  const mavg::BlackScholesParams params{100.0, 0.05, 0.3};
  const mavg::OptionSpec opt{0.2, 50, 3};
  mavg::ContinuationSurrogate next(opt, params);
  Eigen::MatrixXd b(256, 2);
  for (int i = 0; i < 256; ++i) {
    b(i, 0) = 80.0 + 0.2 * i;
    b(i, 1) = 100.0;
  }
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mavg::ghq_continuation(opt, params, next, opt.steps - 1, b, order).sum());
  }
  state.SetItemsProcessed(state.iterations() * b.rows());
}

}  // namespace

BENCHMARK(gh_expectation)->Arg(8)->Arg(16)->Arg(64);
BENCHMARK(backup_step)->Arg(8)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
