#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace codednet {

// Worker cap from CODEDNET_THREADS; defaults to 1 so results never depend on
// the host unless the user opts in.
inline int worker_threads() {
  const char* env = std::getenv("CODEDNET_THREADS");
  if (!env) return 1;
  int v = std::atoi(env);
  if (v < 1) v = 1;
  return std::min(v, 256);
}

// Runs fn(block_index, begin, end) over fixed-size blocks of [0, n). Block
// boundaries do not depend on the thread count, so per-block partial results
// reduced in block order give thread-count-invariant sums.
template <class Fn>
void parallel_blocks(std::uint64_t n, std::uint64_t block_size, Fn&& fn) {
  if (n == 0) return;
  const std::uint64_t n_blocks = (n + block_size - 1) / block_size;
  const int threads = std::min<std::uint64_t>(worker_threads(), n_blocks);
  auto work = [&](int tid) {
    for (std::uint64_t b = tid; b < n_blocks; b += threads) {
      const std::uint64_t lo = b * block_size;
      const std::uint64_t hi = std::min(n, lo + block_size);
      fn(b, lo, hi);
    }
  };
  if (threads <= 1) {
    work(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
  for (auto& th : pool) th.join();
}

}  // namespace codednet
