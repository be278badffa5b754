#include "gbd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gbd {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int n) { g_threads.store(std::max(1, n)); }

int thread_count() { return g_threads.load(); }

int thread_count_from_env() {
  const char* raw = std::getenv("GBD_SLICE_THREADS");
  if (raw == nullptr) return 0;
  try {
    std::size_t pos = 0;
    int n = std::stoi(raw, &pos);
    if (pos != std::string(raw).size() || n < 1) return 0;
    return n;
  } catch (...) {
    return 0;
  }
}

namespace detail {

void parallel_for_impl(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
  const int threads = thread_count();
#ifdef _OPENMP
  if (threads > 1 && n > 1) {
    const auto count = static_cast<long long>(n);
    const int chunk = static_cast<int>(std::max<long long>(1, count / (16LL * threads)));
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for num_threads(threads) schedule(dynamic, chunk)
    for (long long i = 0; i < count; ++i) {
      try {
        body(ctx, static_cast<std::size_t>(i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(ctx, i);
}

}  // namespace detail

double pairwise_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

}  // namespace gbd
