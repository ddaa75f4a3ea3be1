#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rac {

// Fixed set of threads executing one fork-join job at a time. The calling
// thread takes part as worker 0; run() returns only after every worker has
// finished, which is the barrier between engine phases.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return size_; }

  // Calls fn(worker) once on every worker. The first exception thrown by any
  // worker is rethrown here after all workers finish.
  void run(const std::function<void(std::size_t)>& fn);

  // Splits [0, total) into size() contiguous ranges; fn(worker, begin, end).
  void for_ranges(std::size_t total,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

  // Runs fn(task) for task in [0, tasks), tasks dealt round-robin to workers.
  void for_tasks(std::size_t tasks, const std::function<void(std::size_t)>& fn);

  static std::pair<std::size_t, std::size_t> range_of(std::size_t worker, std::size_t workers,
                                                      std::size_t total);

 private:
  void loop(std::size_t worker);

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable start_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t generation_ = 0;
  std::size_t remaining_ = 0;
  bool stopping_ = false;
  std::exception_ptr error_;
};

}  // namespace rac
