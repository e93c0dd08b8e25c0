#ifndef TXHIST_PARALLEL_HPP
#define TXHIST_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace txhist {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Tasks are
/// claimed dynamically; callers write results by index so the outcome does
/// not depend on scheduling. The first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for task `index` on stream `stream` (e.g. 1 = folds, 2 = trees).
/// Depends only on its arguments, so parallel tasks draw reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(parent ^ mix64(stream)) + index);
}

}  // namespace txhist

#endif  // TXHIST_PARALLEL_HPP
