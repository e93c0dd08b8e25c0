#ifndef TXHIST_COUNTING_ALLOCATOR_HPP
#define TXHIST_COUNTING_ALLOCATOR_HPP

#include <algorithm>
#include <cstddef>
#include <memory>

namespace txhist {

struct AllocationCounter {
  std::size_t current_bytes = 0;
  std::size_t peak_bytes = 0;
  std::size_t allocations = 0;

  void allocate(std::size_t bytes) {
    current_bytes += bytes;
    peak_bytes = std::max(peak_bytes, current_bytes);
    ++allocations;
  }
  void release(std::size_t bytes) { current_bytes -= bytes; }
};

/// std::allocator wrapper that reports every allocation to a shared counter.
/// Not thread-safe; one counter per owning container.
template <typename T>
class CountingAllocator {
 public:
  using value_type = T;

  explicit CountingAllocator(std::shared_ptr<AllocationCounter> counter)
      : counter_(std::move(counter)) {}

  template <typename U>
  CountingAllocator(const CountingAllocator<U>& other) : counter_(other.counter()) {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    counter_->allocate(n * sizeof(T));
    return p;
  }

  void deallocate(T* p, std::size_t n) {
    counter_->release(n * sizeof(T));
    std::allocator<T>{}.deallocate(p, n);
  }

  const std::shared_ptr<AllocationCounter>& counter() const { return counter_; }

  template <typename U>
  bool operator==(const CountingAllocator<U>& other) const {
    return counter_ == other.counter();
  }

 private:
  std::shared_ptr<AllocationCounter> counter_;
};

}  // namespace txhist

#endif  // TXHIST_COUNTING_ALLOCATOR_HPP
