#include "wavelab/common.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <thread>

namespace wavelab {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

class Pool {
 public:
  explicit Pool(int n) {
    for (int i = 0; i < n; ++i)
      workers_.emplace_back([this] { work_loop(); });
  }
  ~Pool() {
    {
      std::unique_lock lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  void run(std::size_t chunks, const std::function<void(std::size_t)>& fn) {
    if (chunks == 0) return;
    if (workers_.empty() || chunks == 1) {
      for (std::size_t i = 0; i < chunks; ++i) fn(i);
      return;
    }
    {
      std::unique_lock lk(mu_);
      fn_ = &fn;
      next_ = 0;
      total_ = chunks;
      pending_ = chunks;
      ++epoch_;
    }
    cv_.notify_all();
    // The calling thread participates.
    for (;;) {
      std::size_t i = next_.fetch_add(1);
      if (i >= total_) break;
      fn(i);
      if (pending_.fetch_sub(1) == 1) done_cv_.notify_all();
    }
    std::unique_lock lk(mu_);
    done_cv_.wait(lk, [this] { return pending_.load() == 0; });
    fn_ = nullptr;
  }

  int size() const { return static_cast<int>(workers_.size()); }

 private:
  void work_loop() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* fn = nullptr;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
        fn = fn_;
      }
      if (!fn) continue;
      for (;;) {
        std::size_t i = next_.fetch_add(1);
        if (i >= total_) break;
        (*fn)(i);
        if (pending_.fetch_sub(1) == 1) done_cv_.notify_all();
      }
    }
  }

  std::vector<std::thread> workers_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  const std::function<void(std::size_t)>* fn_ = nullptr;
  std::atomic<std::size_t> next_{0};
  std::size_t total_ = 0;
  std::atomic<std::size_t> pending_{0};
  std::uint64_t epoch_ = 0;
  bool stop_ = false;
};

int g_threads = 0;
Pool* g_pool = nullptr;
std::mutex g_pool_mu;

Pool& pool() {
  std::unique_lock lk(g_pool_mu);
  if (!g_pool) {
    int n = g_threads > 0 ? g_threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    g_pool = new Pool(n - 1);  // caller thread is worker #n
  }
  return *g_pool;
}

}  // namespace

void set_thread_count(int n) {
  std::unique_lock lk(g_pool_mu);
  if (g_pool) {
    delete g_pool;
    g_pool = nullptr;
  }
  g_threads = n;
}

int thread_count() { return pool().size() + 1; }

void parallel_for(std::size_t chunks, const std::function<void(std::size_t)>& fn) {
  pool().run(chunks, fn);
}

}  // namespace wavelab
