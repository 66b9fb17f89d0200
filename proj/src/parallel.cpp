#include "nufocus/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace nufocus {

int resolve_threads(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("NUFOCUS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to hardware concurrency
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, count);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        for (std::size_t i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            errors[w] = std::current_exception();
            error_index[w] = i;
            return;
          }
        }
      });
    }
  }
  std::size_t first = count;
  std::exception_ptr err;
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w] && error_index[w] < first) {
      first = error_index[w];
      err = errors[w];
    }
  }
  if (err) std::rethrow_exception(err);
}

}  // namespace nufocus
