#pragma once

#include <cstdint>

#include "mavg/models.hpp"
#include "mavg/result.hpp"
#include "mavg/state.hpp"

namespace mavg {

// Exercise payoff per unit of current spot on the binomial chain,
//   max(0, 1 - (1/M) sum_{j=0}^{M-1} S_{t_{n-j}} / S_{t_n}),
// where mask holds the last M-1 up/down moves, bit 0 the newest.
double bc_payoff(std::uint32_t mask, int window, double sigma, double dt);

// Deterministic price on the Cox-Ross-Rubinstein chain exploiting the
// payoff's homogeneity in the spot: the value per unit spot depends only on
// the last M-1 moves, so a table over 2^(M-1) bitmasks replaces the
// exponentially branching tree. Memory is O(2^(M-1)); window <= 30 enforced.
// Exact in the chain (no sampling): ci_radius = 0, n_paths = 0.
PriceResult price_bc(const OptionSpec& opt, const BlackScholesParams& params);

}  // namespace mavg
