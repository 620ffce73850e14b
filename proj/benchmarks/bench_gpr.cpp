// Surrogate costs: hyperparameter fit (cubic in P) and batched posterior
// means (linear in query rows, P kernel evaluations each).
#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "mavg/gpr.hpp"
#include "mavg/sequences.hpp"

namespace {

Eigen::MatrixXd inputs(int rows, std::uint64_t seed) {
  const auto stream = mavg::seq::NormalStream::pseudo(seed, 2, false);
  return mavg::seq::normal_matrix(stream, rows);
}

Eigen::VectorXd targets(const Eigen::MatrixXd& x) {
  return (x.col(0).array() * 1.3).sin() + 0.5 * (x.col(1).array()).cos();
}

void gpr_fit(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Eigen::MatrixXd x = inputs(p, 11);
  const Eigen::VectorXd y = targets(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mavg::gpr::fit(x, y).lml);
  }
}

void gpr_predict(benchmark::State& state) {
  const Eigen::MatrixXd x = inputs(1000, 11);
  const Eigen::VectorXd y = targets(x);
  const mavg::gpr::Model m = mavg::gpr::fit(x, y);
  const Eigen::MatrixXd q = inputs(static_cast<int>(state.range(0)), 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mavg::gpr::predict(m, q).sum());
  }
  state.SetItemsProcessed(state.iterations() * q.rows());
}

}  // namespace

BENCHMARK(gpr_fit)->Arg(250)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(gpr_predict)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
