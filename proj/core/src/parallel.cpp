#include "mfract/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace mfract {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t default_threads() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MFRACT_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      // unparsable value: ignore the cap
    }
  }
  return n;
}

}  // namespace

std::size_t thread_count() {
  const std::size_t o = g_override.load();
  return o != 0 ? o : default_threads();
}

void set_thread_count(std::size_t n) { g_override.store(n); }

void parallel_rows(std::size_t rows,
                   const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), rows);
  if (workers <= 1) {
    if (rows > 0) body(0, rows);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t band = (rows + workers - 1) / workers;
  for (std::size_t begin = 0; begin < rows; begin += band) {
    const std::size_t end = std::min(rows, begin + band);
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mfract
