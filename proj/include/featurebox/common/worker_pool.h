/*
 * Copyright 2026 The FeatureBox Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

namespace featurebox {

// Fixed-size FIFO thread pool. Tasks submitted after destruction starts are
// rejected; the destructor drains queued tasks before joining.
class WorkerPool {
 public:
  explicit WorkerPool(size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  size_t size() const { return threads_.size(); }

  std::future<void> submit(std::function<void()> task);

  // Runs fn(i) for i in [0, n) across the workers and blocks until all
  // finish. The first exception thrown by any index is rethrown.
  void parallel_for(size_t n, const std::function<void(size_t)>& fn);

 private:
  void run();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::packaged_task<void()>> tasks_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

// Worker count from FEATUREBOX_THREADS when set, else `fallback`. Always >= 1.
size_t worker_count_from_env(size_t fallback);

}  // namespace featurebox
