#pragma once

#include <cstdint>

#include "mavg/result.hpp"
#include "mavg/surrogate.hpp"

namespace mavg {

// Lower-bound check of a fitted surrogate by forward simulation: fresh
// antithetic pseudo paths exercise at the first date n >= M with
// payoff >= continuation (ties exercise; date N always exercises), each path
// contributing e^{-r t_n} payoff. The CI is 1.96 standard errors over
// antithetic pair means. Requires steps for every date M..N.
PriceResult evaluate_policy(const ContinuationSurrogate& surrogate,
                            long long n_paths, std::uint64_t seed,
                            int rb_memory = 3);

// Paths needed (rounded up to an even count) for a 1.96-standard-error
// radius <= target, scaled from a pilot run's pair-mean variance. A
// zero-variance pilot just returns its own path count.
long long paths_for_ci(double target_radius, const PriceResult& pilot);

}  // namespace mavg
