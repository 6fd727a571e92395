#include "ragc/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ragc {

namespace {
int g_override = -1;

std::size_t env_threads() {
  const char* env = std::getenv("RAGC_THREADS");
  if (!env || !*env) return 0;
  try {
    const long v = std::stol(env);
    return v > 0 ? static_cast<std::size_t>(v) : 0;
  } catch (...) {
    return 0;
  }
}
}  // namespace

std::size_t thread_count() {
  if (g_override >= 0) return static_cast<std::size_t>(g_override);
  static const std::size_t from_env = env_threads();
  return from_env;
}

void set_thread_count(int threads) { g_override = threads; }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  const std::size_t workers = std::min(thread_count(), n / std::max<std::size_t>(min_chunk, 1));
  if (workers <= 1) {
    if (n) body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  body(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace ragc
