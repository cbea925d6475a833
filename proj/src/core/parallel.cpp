#include "mtt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mtt/errors.hpp"

namespace mtt {

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers == 1) {
    body(0, count);
    return;
  }
  // More chunks than workers so uneven replicate costs balance out.
  const std::size_t chunks = std::min(count, workers * 8);
  std::size_t next = 0;
  std::mutex lock;
  std::exception_ptr error;
  auto run = [&]() {
    for (;;) {
      std::size_t chunk;
      {
        std::lock_guard<std::mutex> guard(lock);
        if (next == chunks || error) return;
        chunk = next++;
      }
      const std::size_t begin = chunk * count / chunks;
      const std::size_t end = (chunk + 1) * count / chunks;
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> guard(lock);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MTT_FISHER_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("MTT_FISHER_THREADS must be a positive integer, got '") + env + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace mtt
