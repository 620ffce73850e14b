#include "mavg/engine_bc.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mavg/parallel.hpp"

namespace mavg {

double bc_payoff(std::uint32_t mask, int window, double sigma, double dt) {
  const double step = sigma * std::sqrt(dt);
  double sum = 1.0;     // the current spot itself
  double log_rel = 0.0; // log of (price j steps back / current spot)
  for (int j = 0; j < window - 1; ++j) {
    log_rel -= (mask >> j & 1u) ? step : -step;
    sum += std::exp(log_rel);
  }
  return std::max(0.0, 1.0 - sum / window);
}

PriceResult price_bc(const OptionSpec& opt, const BlackScholesParams& params) {
  const auto t_start = std::chrono::steady_clock::now();
  opt.validate();
  params.validate();
  if (opt.window > 30)
    throw std::invalid_argument("bc: window > 30 needs a 2^(window-1) table");

  const int m = opt.window;
  const double dt = opt.dt();
  const double step = params.sigma * std::sqrt(dt);
  const double up = std::exp(step);
  const double dw = std::exp(-step);
  const double p_up = (std::exp(params.rate * dt) - dw) / (up - dw);
  if (!(p_up > 0.0 && p_up < 1.0))
    throw std::domain_error("bc: up probability outside (0,1); grid too coarse");
  const double p_dw = 1.0 - p_up;
  const double disc = std::exp(-params.rate * dt);

  const std::size_t n_masks = std::size_t{1} << (m - 1);
  const auto full = static_cast<std::uint32_t>(n_masks - 1);

  std::vector<double> psi(n_masks);
  parallel_for_blocks(n_masks, 4096, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s)
      psi[s] = bc_payoff(static_cast<std::uint32_t>(s), m, params.sigma, dt);
  });

  // cur holds the per-unit-spot continuation at the next date; each sweep
  // writes the current date into nxt. All dates n+1 in M..N are exercisable.
  std::vector<double> cur(n_masks, 0.0);
  std::vector<double> nxt(n_masks);
  for (int n = opt.steps - 1; n >= m; --n) {
    parallel_for_blocks(n_masks, 4096, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t s = lo; s < hi; ++s) {
        const auto mask = static_cast<std::uint32_t>(s);
        const std::uint32_t su = ((mask << 1) | 1u) & full;
        const std::uint32_t sd = (mask << 1) & full;
        nxt[s] = disc * (p_up * up * std::max(psi[su], cur[su]) +
                         p_dw * dw * std::max(psi[sd], cur[sd]));
      }
    });
    cur.swap(nxt);
  }

  // V_0 = S_0 e^{-r t_M} E[(S_{t_M}/S_0) max(psi, C_M)]. The move falling off
  // the mask contributes the factor p_up*up + p_dw*dw; the M-1 retained moves
  // give spot factor up^(2 popcount - (M-1)) at probability
  // p_up^popcount * p_dw^(M-1-popcount).
  std::vector<double> weight(static_cast<std::size_t>(m));
  for (int pc = 0; pc < m; ++pc)
    weight[static_cast<std::size_t>(pc)] = std::pow(p_up, pc) *
                                           std::pow(p_dw, m - 1 - pc) *
                                           std::pow(up, 2 * pc - (m - 1));
  constexpr std::size_t kBlock = 65536;
  std::vector<double> partial((n_masks + kBlock - 1) / kBlock, 0.0);
  parallel_for_blocks(n_masks, kBlock, [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t s = lo; s < hi; ++s)
      acc += weight[static_cast<std::size_t>(
                 std::popcount(static_cast<std::uint32_t>(s)))] *
             std::max(psi[s], cur[s]);
    partial[lo / kBlock] = acc;
  });
  const double price = params.s0 * std::exp(-params.rate * dt * m) *
                       (p_up * up + p_dw * dw) * pairwise_sum(partial);

  PriceResult res;
  res.price = price;
  res.ci_radius = 0.0;
  res.n_paths = 0;
  res.model = "bs";
  res.engine = "bc";
  res.window = m;
  res.steps = opt.steps;
  res.maturity = opt.maturity;
  res.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return res;
}

}  // namespace mavg
