#pragma once

#include <cstdint>
#include <vector>

#include "mavg/models.hpp"
#include "mavg/result.hpp"
#include "mavg/state.hpp"

namespace mavg {

struct LsConfig {
  long long n_paths = 100'000;  // P (antithetic total)
  int degree = 2;               // polynomial total degree
  int rb_memory = 3;            // J: rough-Bergomi conditioning depth
  std::uint64_t seed = 1;
  bool antithetic = true;  // off only for variance-reduction measurements
  void validate() const;   // P >= 2, degree >= 1, J >= 0
};

// Longstaff-Schwartz with cashflow regression: simulate P paths, then walk
// backward from N-1 to M regressing realized discounted future cashflows on all
// monomials of total degree <= degree in the standardized state (conditioning
// features first under rough Bergomi), exercising where payoff >= fitted
// continuation. Regression runs over every path (the payoff is nonnegative
// everywhere, so in-the-money filtering has no meaning here). Requires
// P >= 10 * basis size; a singular normal system falls back to ridge
// (lambda = 1e-10 * trace) with a warning on the result.
PriceResult price_ls(const OptionSpec& opt, const ModelParams& params,
                     const LsConfig& cfg);

namespace detail {

// Exponent rows of all D-variate monomials with total degree <= degree,
// graded lexicographic, constant term first.
std::vector<std::vector<int>> monomial_exponents(int dims, int degree);

}  // namespace detail

}  // namespace mavg
