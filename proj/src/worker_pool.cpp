#include "rac/worker_pool.hpp"

#include <algorithm>
#include <utility>

namespace rac {

WorkerPool::WorkerPool(std::size_t workers) : size_(std::max<std::size_t>(1, workers)) {
  threads_.reserve(size_ - 1);
  for (std::size_t w = 1; w < size_; ++w) threads_.emplace_back([this, w] { loop(w); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
    ++generation_;
  }
  start_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::loop(std::size_t worker) {
  std::size_t seen = 0;
  while (true) {
    const std::function<void(std::size_t)>* job = nullptr;
    {
      std::unique_lock lock(mutex_);
      start_.wait(lock, [&] { return generation_ != seen; });
      seen = generation_;
      if (stopping_) return;
      job = job_;
    }
    std::exception_ptr error;
    try {
      (*job)(worker);
    } catch (...) {
      error = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (error && !error_) error_ = error;
      if (--remaining_ == 0) done_.notify_one();
    }
  }
}

void WorkerPool::run(const std::function<void(std::size_t)>& fn) {
  if (size_ == 1) {
    fn(0);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_ = &fn;
    remaining_ = size_ - 1;
    ++generation_;
  }
  start_.notify_all();
  std::exception_ptr error;
  try {
    fn(0);
  } catch (...) {
    error = std::current_exception();
  }
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return remaining_ == 0; });
  job_ = nullptr;
  if (!error) error = std::exchange(error_, nullptr);
  error_ = nullptr;
  if (error) std::rethrow_exception(error);
}

std::pair<std::size_t, std::size_t> WorkerPool::range_of(std::size_t worker, std::size_t workers,
                                                         std::size_t total) {
  const std::size_t chunk = total / workers;
  const std::size_t extra = total % workers;
  const std::size_t begin = worker * chunk + std::min(worker, extra);
  return {begin, begin + chunk + (worker < extra ? 1 : 0)};
}

void WorkerPool::for_ranges(std::size_t total,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  run([&](std::size_t w) {
    auto [begin, end] = range_of(w, size_, total);
    fn(w, begin, end);
  });
}

void WorkerPool::for_tasks(std::size_t tasks, const std::function<void(std::size_t)>& fn) {
  run([&](std::size_t w) {
    for (std::size_t t = w; t < tasks; t += size_) fn(t);
  });
}

}  // namespace rac
