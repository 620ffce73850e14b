#include "mavg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mavg {

namespace {
std::atomic<int> g_threads{0};

int resolve_threads() {
  const int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_thread_count(int n) {
  if (n < 0) throw std::invalid_argument("thread count must be >= 0");
  g_threads.store(n, std::memory_order_relaxed);
}

int thread_count() { return resolve_threads(); }

void parallel_for_blocks(std::size_t count, std::size_t block_size,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (block_size == 0) throw std::invalid_argument("block_size must be positive");
  const std::size_t nblocks = (count + block_size - 1) / block_size;
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads()), nblocks);
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b * block_size, std::min(count, (b + 1) * block_size));
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= nblocks) return;
      try {
        fn(b * block_size, std::min(count, (b + 1) * block_size));
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace mavg
