#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "snchol/sparse.hpp"

namespace snchol {

/// Fixed pool of workers with per-worker deques and round-robin stealing.
/// Outer tasks are FIFO per worker; inner tasks are LIFO for the owner and
/// FIFO for thieves. Waiting on a join executes inner tasks only, so joins
/// can never deadlock (inner tasks have no dependencies).
class WorkerPool {
 public:
  struct Task {
    index_t a = 0;
    index_t b = 0;
  };
  using TaskFn = std::function<void(const Task&, int worker)>;
  using ChunkFn = std::function<void(index_t, index_t)>;

  explicit WorkerPool(int workers) : queues_(static_cast<std::size_t>(workers)) {
    threads_.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    stop_.store(true);
    {
      std::lock_guard<std::mutex> lk(sleep_mutex_);
      cv_.notify_all();
    }
    for (auto& t : threads_) t.join();
  }

  int size() const { return static_cast<int>(threads_.size()); }

  void begin_job(TaskFn fn) { fn_ = std::move(fn); }

  void push_outer(const Task& t, int worker_hint) {
    pushed_.fetch_add(1);  // before enqueue, so completed_ can never pass it
    auto& q = queues_[static_cast<std::size_t>(worker_hint) % queues_.size()];
    {
      std::lock_guard<std::mutex> lk(q.mutex);
      q.outer.push_back(t);
    }
    wake_one();
  }

  void push_inner(const Task& t, int worker) {
    pushed_.fetch_add(1);
    auto& q = queues_[static_cast<std::size_t>(worker)];
    {
      std::lock_guard<std::mutex> lk(q.mutex);
      q.inner.push_back(t);
    }
    wake_one();
  }

  /// Blocks the (external) calling thread until every pushed task finished.
  void wait_all() {
    std::unique_lock<std::mutex> lk(sleep_mutex_);
    done_cv_.wait(lk, [&] { return completed_.load() >= pushed_.load(); });
  }

  /// Join point inside an outer task: run inner tasks (own queue first, then
  /// steal) until `pending` drops to zero.
  void help_with_inner(int worker, const std::atomic<index_t>& pending) {
    while (pending.load(std::memory_order_acquire) > 0) {
      Task t;
      if (pop_inner(worker, t) || steal_inner(worker, t)) {
        run_task(t, worker);
      } else {
        std::this_thread::yield();
      }
    }
  }

  /// Fork-join helper for the kernel-parallel variants. Must not be called
  /// while job tasks are in flight; the caller blocks until all chunks ran.
  void parallel_for(index_t begin, index_t end, index_t grain,
                    const ChunkFn& body) {
    const index_t count = end - begin;
    if (count <= 0) return;
    const index_t workers = static_cast<index_t>(queues_.size());
    index_t chunk = std::max<index_t>(grain, (count + workers * 4 - 1) / (workers * 4));
    const index_t n_chunks = (count + chunk - 1) / chunk;
    if (n_chunks <= 1) {
      body(begin, end);
      return;
    }
    chunk_body_ = &body;
    chunks_left_.store(n_chunks);
    int hint = 0;
    for (index_t c = begin; c < end; c += chunk) {
      Task t{c, std::min(end, c + chunk)};
      auto& q = queues_[static_cast<std::size_t>(hint++ % size())];
      {
        std::lock_guard<std::mutex> lk(q.mutex);
        q.chunks.push_back(t);
      }
    }
    {
      std::lock_guard<std::mutex> lk(sleep_mutex_);
      cv_.notify_all();
    }
    while (chunks_left_.load(std::memory_order_acquire) > 0)
      std::this_thread::yield();
    chunk_body_ = nullptr;
  }

 private:
  struct Queue {
    std::mutex mutex;
    std::deque<Task> outer;
    std::deque<Task> inner;
    std::deque<Task> chunks;
  };

  void run_task(const Task& t, int worker) {
    fn_(t, worker);
    const std::uint64_t done = completed_.fetch_add(1) + 1;
    if (done >= pushed_.load()) {
      std::lock_guard<std::mutex> lk(sleep_mutex_);
      done_cv_.notify_all();
    }
  }

  bool pop_inner(int w, Task& t) {
    auto& q = queues_[static_cast<std::size_t>(w)];
    std::lock_guard<std::mutex> lk(q.mutex);
    if (q.inner.empty()) return false;
    t = q.inner.back();
    q.inner.pop_back();
    return true;
  }

  bool pop_outer(int w, Task& t) {
    auto& q = queues_[static_cast<std::size_t>(w)];
    std::lock_guard<std::mutex> lk(q.mutex);
    if (q.outer.empty()) return false;
    t = q.outer.front();
    q.outer.pop_front();
    return true;
  }

  bool pop_chunk(int w, Task& t) {
    auto& q = queues_[static_cast<std::size_t>(w)];
    std::lock_guard<std::mutex> lk(q.mutex);
    if (q.chunks.empty()) return false;
    t = q.chunks.front();
    q.chunks.pop_front();
    return true;
  }

  bool steal_inner(int w, Task& t) {
    const int n = size();
    for (int i = 1; i < n; ++i) {
      auto& q = queues_[static_cast<std::size_t>((w + i) % n)];
      std::lock_guard<std::mutex> lk(q.mutex);
      if (!q.inner.empty()) {
        t = q.inner.front();
        q.inner.pop_front();
        return true;
      }
    }
    return false;
  }

  bool steal_any(int w, Task& t, bool& is_chunk) {
    const int n = size();
    for (int i = 1; i < n; ++i) {
      auto& q = queues_[static_cast<std::size_t>((w + i) % n)];
      std::lock_guard<std::mutex> lk(q.mutex);
      if (!q.chunks.empty()) {
        t = q.chunks.front();
        q.chunks.pop_front();
        is_chunk = true;
        return true;
      }
      if (!q.inner.empty()) {
        t = q.inner.front();
        q.inner.pop_front();
        is_chunk = false;
        return true;
      }
      if (!q.outer.empty()) {
        t = q.outer.front();
        q.outer.pop_front();
        is_chunk = false;
        return true;
      }
    }
    return false;
  }

  void worker_loop(int w) {
    int idle_spins = 0;
    while (!stop_.load(std::memory_order_acquire)) {
      Task t;
      bool is_chunk = false;
      bool got = false;
      if (pop_chunk(w, t)) {
        got = true;
        is_chunk = true;
      } else if (pop_inner(w, t) || pop_outer(w, t)) {
        got = true;
      } else if (steal_any(w, t, is_chunk)) {
        got = true;
      }
      if (got) {
        idle_spins = 0;
        if (is_chunk) {
          (*chunk_body_)(t.a, t.b);
          chunks_left_.fetch_sub(1, std::memory_order_release);
        } else {
          run_task(t, w);
        }
        continue;
      }
      if (++idle_spins < 64) {
        std::this_thread::yield();
        continue;
      }
      std::unique_lock<std::mutex> lk(sleep_mutex_);
      cv_.wait_for(lk, std::chrono::microseconds(200));
    }
  }

  void wake_one() {
    std::lock_guard<std::mutex> lk(sleep_mutex_);
    cv_.notify_one();
  }

  std::vector<Queue> queues_;
  std::vector<std::thread> threads_;
  TaskFn fn_;
  const ChunkFn* chunk_body_ = nullptr;
  std::atomic<std::uint64_t> pushed_{0};
  std::atomic<std::uint64_t> completed_{0};
  std::atomic<index_t> chunks_left_{0};
  std::atomic<bool> stop_{false};
  std::mutex sleep_mutex_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
};

}  // namespace snchol
