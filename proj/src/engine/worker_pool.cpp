#include "lemsim/engine/worker_pool.hpp"

#include <algorithm>

namespace lemsim {

WorkerPool::WorkerPool(int threads) : threads_(std::max(1, threads)) {
  for (int i = 1; i < threads_; ++i) workers_.emplace_back([this] { worker(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lk(mu_);
    stop_ = true;
  }
  cv_work_.notify_all();
  for (auto& t : workers_) t.join();
}

void WorkerPool::run(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  if (threads_ == 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::unique_lock lk(mu_);
  fn_ = &fn;
  n_ = n;
  next_ = 0;
  active_ = 0;
  err_index_ = -1;
  err_ = nullptr;
  ++generation_;
  cv_work_.notify_all();
  // The caller works too.
  while (next_ < n_) {
    const std::int64_t i = next_++;
    ++active_;
    lk.unlock();
    try {
      fn(i);
      lk.lock();
    } catch (...) {
      lk.lock();
      if (err_index_ < 0 || i < err_index_) {
        err_index_ = i;
        err_ = std::current_exception();
      }
    }
    --active_;
  }
  cv_done_.wait(lk, [this] { return active_ == 0 && next_ >= n_; });
  fn_ = nullptr;
  if (err_) std::rethrow_exception(err_);
}

void WorkerPool::worker() {
  std::uint64_t seen = 0;
  std::unique_lock lk(mu_);
  for (;;) {
    cv_work_.wait(lk, [&] { return stop_ || (generation_ != seen && fn_ != nullptr); });
    if (stop_) return;
    seen = generation_;
    while (fn_ != nullptr && next_ < n_) {
      const std::int64_t i = next_++;
      ++active_;
      const auto* fn = fn_;
      lk.unlock();
      try {
        (*fn)(i);
        lk.lock();
      } catch (...) {
        lk.lock();
        if (err_index_ < 0 || i < err_index_) {
          err_index_ = i;
          err_ = std::current_exception();
        }
      }
      --active_;
    }
    cv_done_.notify_all();
  }
}

}  // namespace lemsim
