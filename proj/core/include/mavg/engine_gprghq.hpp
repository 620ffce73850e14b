#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "mavg/models.hpp"
#include "mavg/result.hpp"
#include "mavg/state.hpp"
#include "mavg/surrogate.hpp"

namespace mavg {

struct GprGhqConfig {
  long long n_train = 1000;  // P: quasi-random training points per date
  int quad_order = 16;       // Q
  int rb_memory = 3;         // J: rough-Bergomi conditioning depth
  long long mc_final_paths = 2'000'000;  // antithetic total (rounded up to even)
  std::uint64_t seed = 1;    // drives the final pseudo-random stage only
  bool use_similarity = true;  // Black-Scholes: learn at unit spot, rescale
  int halton_burn_in = 20;
  int gpr_max_iterations = 200;
  void validate() const;  // P in [1, 15000], Q in [1, 128], J >= 0, paths > 0
};

// Backward induction: fits one continuation estimator per date, n = N-1 down
// to M. The last date before expiry uses the closed form under BS/CS; the
// Black-Scholes M = 2 similarity case needs no training paths at all (the
// reduced state is a point, so each date's fit is a scalar recursion).
ContinuationSurrogate solve_gprghq(const OptionSpec& opt, const ModelParams& params,
                                   const GprGhqConfig& cfg);

// One-date quadrature continuation against an already-fitted next date:
//   e^{-r dt} E[max(payoff_{n+1}, C_{n+1}(B_{n+1}))] per row of b,
// the engine's inner backup step, exposed for direct checking. BS/CS only
// (the rough-Bergomi step conditions on the Gaussian history, which lives
// inside the engine).
Eigen::VectorXd ghq_continuation(const OptionSpec& opt, const ModelParams& params,
                                 const ContinuationSurrogate& next, int n,
                                 const Eigen::Ref<const Eigen::MatrixXd>& b,
                                 int quad_order);

// solve + final stage: price = e^{-r t_M} E[max(payoff_M, C_M(B_M))] over
// fresh antithetic pseudo-random paths, CI over pair means. When
// surrogate_out is nonnull the fitted surrogate is copied there for reuse
// (policy benchmarks).
PriceResult price_gprghq(const OptionSpec& opt, const ModelParams& params,
                         const GprGhqConfig& cfg,
                         ContinuationSurrogate* surrogate_out = nullptr);

namespace detail {

// Reduced states B_n for every path: row p is (mean of last M-1 prices, ...,
// mean of last 2 prices, spot) truncated to the date-n dimension; spots has
// one price per column, column i = S_{t_i}, and must cover i <= n.
Eigen::MatrixXd reduced_states(const OptionSpec& opt,
                               const Eigen::Ref<const Eigen::MatrixXd>& spots, int n);

// Exercise payoff max(0, spot - mean of the last M prices) per path at date
// n >= M, straight from the stored prices.
Eigen::VectorXd path_payoffs(const OptionSpec& opt,
                             const Eigen::Ref<const Eigen::MatrixXd>& spots, int n);

}  // namespace detail

}  // namespace mavg
