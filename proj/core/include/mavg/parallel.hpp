#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mavg {

// Worker count used by every parallel loop in the library; 0 restores the
// hardware default. Prices never depend on this setting: work is split into
// blocks of a fixed size and all reductions happen in block order.
void set_thread_count(int n);
int thread_count();

// Calls fn(begin, end) over disjoint ranges covering [0, count), each
// block_size long except the tail. fn must only write state owned by its
// range; the first exception thrown by any block is rethrown.
void parallel_for_blocks(std::size_t count, std::size_t block_size,
                         const std::function<void(std::size_t, std::size_t)>& fn);

// Pairwise (cascade) summation in index order: deterministic and independent
// of the thread count.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

}  // namespace mavg
