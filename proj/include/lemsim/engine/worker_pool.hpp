#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lemsim {

/// Fixed set of threads running index-parallel loops. With one thread the
/// loop runs inline on the caller.
class WorkerPool {
 public:
  explicit WorkerPool(int threads);
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  [[nodiscard]] int size() const noexcept { return threads_; }

  /// Calls fn(i) for every i in [0, n) and blocks until all calls return.
  /// Rethrows the exception of the lowest failing index.
  void run(std::int64_t n, const std::function<void(std::int64_t)>& fn);

 private:
  void worker();

  int threads_;
  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_work_, cv_done_;
  const std::function<void(std::int64_t)>* fn_{nullptr};
  std::int64_t n_{0}, next_{0}, active_{0};
  std::uint64_t generation_{0};
  bool stop_{false};
  std::int64_t err_index_{-1};
  std::exception_ptr err_;
};

}  // namespace lemsim
