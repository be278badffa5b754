#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gbd {

/// Process-wide worker count used by every parallel map in the library.
/// Results never depend on it: each task writes its own slot and reductions
/// run in a fixed pairwise order afterwards.
void set_thread_count(int n);
int thread_count();

/// Reads GBD_SLICE_THREADS; returns 0 when unset or malformed.
int thread_count_from_env();

namespace detail {
void parallel_for_impl(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

template <class F>
void parallel_for(std::size_t n, F&& body) {
  detail::parallel_for_impl(n, &body, [](void* c, std::size_t i) { (*static_cast<F*>(c))(i); });
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

/// Pairwise (tree) summation; the association order depends only on size.
double pairwise_sum(std::span<const double> xs);

}  // namespace gbd
