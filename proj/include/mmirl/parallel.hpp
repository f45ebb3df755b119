#ifndef MMIRL_PARALLEL_HPP_
#define MMIRL_PARALLEL_HPP_

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mmirl {

/// Runs fn(task_index) for task_index in [0, n_tasks) on up to `workers`
/// threads. Task decomposition is fixed by n_tasks, never by thread count,
/// and callers write results into pre-sized per-task slots, so outputs are
/// identical for any worker count. Exceptions are captured and rethrown.
inline void parallel_tasks(int n_tasks, int workers, const std::function<void(int)>& fn) {
  if (n_tasks <= 0) return;
  const int n_threads = std::min(workers, n_tasks);
  if (n_threads <= 1) {
    for (int i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Fixed chunk count for gradient accumulation; summing the per-chunk
// buffers in chunk order keeps updates bit-identical across worker counts.
inline constexpr int kGradChunks = 8;

struct ChunkRange {
  int begin, end;
};

inline ChunkRange chunk_range(int n_items, int chunk) {
  const int base = n_items / kGradChunks;
  const int rem = n_items % kGradChunks;
  const int begin = chunk * base + std::min(chunk, rem);
  const int len = base + (chunk < rem ? 1 : 0);
  return {begin, begin + len};
}

}  // namespace mmirl

#endif  // MMIRL_PARALLEL_HPP_
