#include "carre/parallel.hpp"

#include <atomic>
#include <thread>

namespace carre {

namespace {

std::atomic<int> g_threads{0};  // 0 = hardware default
thread_local bool t_in_worker = false;

int effective_threads() {
  int t = g_threads.load();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return t > 0 ? t : 1;
}

}  // namespace

void set_thread_count(int threads) { g_threads.store(threads); }

int thread_count() { return effective_threads(); }

std::size_t parallel_chunk_count(std::size_t count) {
  return count < 256 ? count : 256;
}

void parallel_chunks(
    std::size_t count,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t chunks = parallel_chunk_count(count);
  auto bounds = [&](std::size_t c) {
    // even partition, first (count % chunks) chunks one element longer
    const std::size_t base = count / chunks, extra = count % chunks;
    const std::size_t begin = c * base + (c < extra ? c : extra);
    return std::make_pair(begin, begin + base + (c < extra ? 1 : 0));
  };

  const int workers = effective_threads();
  if (workers <= 1 || t_in_worker || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [b, e] = bounds(c);
      fn(c, b, e);
    }
    return;
  }

  // capture worker exceptions; rethrow the one from the smallest chunk so
  // the surfaced error does not depend on scheduling
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    t_in_worker = true;
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      auto [b, e] = bounds(c);
      try {
        fn(c, b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
    t_in_worker = false;
  };
  std::vector<std::thread> pool;
  const int spawn = std::min<std::size_t>(workers, chunks);
  pool.reserve(spawn - 1);
  for (int i = 1; i < spawn; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (std::size_t c = 0; c < chunks; ++c)
    if (errors[c]) std::rethrow_exception(errors[c]);
}

double pairwise_sum(const std::vector<double>& values) {
  std::function<double(std::size_t, std::size_t)> reduce =
      [&](std::size_t begin, std::size_t end) -> double {
    if (end - begin <= 8) {
      double s = 0.0;
      for (std::size_t i = begin; i < end; ++i) s += values[i];
      return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return reduce(begin, mid) + reduce(mid, end);
  };
  return reduce(0, values.size());
}

double parallel_sum(std::size_t count,
                    const std::function<double(std::size_t)>& term) {
  std::vector<double> partial(parallel_chunk_count(count), 0.0);
  parallel_chunks(count, [&](std::size_t c, std::size_t b, std::size_t e) {
    std::vector<double> local(e - b);
    for (std::size_t i = b; i < e; ++i) local[i - b] = term(i);
    partial[c] = pairwise_sum(local);
  });
  return pairwise_sum(partial);
}

}  // namespace carre
