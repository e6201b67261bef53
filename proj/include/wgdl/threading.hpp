#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace wgdl {

// Worker count for data-parallel kernels (1 = serial). All results are
// bitwise independent of this setting: the index space is always partitioned
// into the same fixed-size blocks, and reductions combine per-block partials
// in block order.
int thread_count();
void set_thread_count(int n);

inline constexpr std::size_t kDefaultBlock = std::size_t{1} << 15;

// Invokes fn(block_index, begin, end) for every block of the partition of
// [0,total). Blocks are claimed dynamically by workers, but the partition
// itself never depends on the worker count.
void parallel_blocks(std::size_t total, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn);

// Cascade summation with a fixed association order.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

// Parallel map over [0,total): f(begin, end) on each block.
template <class F>
void par_for(std::size_t total, F&& f, std::size_t block = kDefaultBlock) {
  parallel_blocks(total, block,
                  [&](std::size_t, std::size_t b, std::size_t e) { f(b, e); });
}

// Deterministic parallel sum: f(begin, end) returns the partial sum of its
// block; partials are combined pairwise in block order.
template <class F>
double par_sum(std::size_t total, F&& f, std::size_t block = kDefaultBlock) {
  if (total == 0) return 0.0;
  const std::size_t nblocks = (total + block - 1) / block;
  std::vector<double> partial(nblocks, 0.0);
  parallel_blocks(total, block,
                  [&](std::size_t bi, std::size_t b, std::size_t e) {
                    partial[bi] = f(b, e);
                  });
  return pairwise_sum(partial);
}

// Deterministic parallel max: max is exactly associative/commutative, so the
// combination order is irrelevant; partials still keep it reproducible.
template <class F>
double par_max(std::size_t total, F&& f, std::size_t block = kDefaultBlock) {
  if (total == 0) return 0.0;
  const std::size_t nblocks = (total + block - 1) / block;
  std::vector<double> partial(nblocks, 0.0);
  parallel_blocks(total, block,
                  [&](std::size_t bi, std::size_t b, std::size_t e) {
                    partial[bi] = f(b, e);
                  });
  double m = partial[0];
  for (std::size_t i = 1; i < nblocks; ++i) m = partial[i] > m ? partial[i] : m;
  return m;
}

}  // namespace wgdl
