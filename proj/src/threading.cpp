#include "wgdl/threading.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace wgdl {

namespace {
int g_threads = 1;
}  // namespace

int thread_count() { return g_threads; }

void set_thread_count(int n) { g_threads = n < 1 ? 1 : n; }

void parallel_blocks(std::size_t total, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn) {
  if (total == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t nblocks = (total + block_size - 1) / block_size;
  auto run_block = [&](std::size_t bi) {
    const std::size_t b = bi * block_size;
    const std::size_t e = std::min(total, b + block_size);
    fn(bi, b, e);
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(g_threads), nblocks);
  if (workers <= 1) {
    for (std::size_t bi = 0; bi < nblocks; ++bi) run_block(bi);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t bi; (bi = next.fetch_add(1)) < nblocks;) run_block(bi);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum(x.data(), x.size());
}

}  // namespace wgdl
