#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qmeter {

// Paths are always processed in fixed blocks of this size and block results
// combined in index order, so ensemble output is independent of threading.
inline constexpr std::size_t kPathBlock = 256;

// Worker count: QMETER_THREADS env override, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("QMETER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 4096) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(b) for b in [0, n_blocks).  Blocks are claimed by an atomic
// counter; since every block writes only its own output slot, scheduling
// cannot influence results.
template <class Fn>
void run_blocks(std::size_t n_blocks, Fn&& fn, unsigned threads = 0) {
  if (threads == 0) threads = thread_count();
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1, std::memory_order_relaxed);
      if (b >= n_blocks) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_workers =
      static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
  pool.reserve(n_workers);
  for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace qmeter
