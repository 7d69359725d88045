#pragma once

#include <cstddef>
#include <vector>

namespace hypo {

/// Number of worker threads. HYPOCOERCE_THREADS wins over OMP_NUM_THREADS;
/// unset or invalid means "all available".
int worker_count();

/// Apply HYPOCOERCE_THREADS to the OpenMP runtime. Called once by the CLI,
/// harmless to call again.
void apply_thread_env();

namespace detail {
// Reduction slab count. Fixed (independent of thread count) so that the
// partial-sum tree, and therefore the rounding, never depends on how many
// workers happen to run. 1024 slabs keeps remainders negligible for the grid
// sizes we care about.
inline constexpr std::size_t kReduceSlabs = 1024;
}  // namespace detail

/// Deterministic parallel sum of term(i) for i in [0, n). Partial sums are
/// accumulated per fixed-count slab and combined serially in slab order, so
/// the result is bit-identical for any thread count, including 1.
template <class F>
double parallel_sum(std::size_t n, F&& term) {
  if (n == 0) return 0.0;
  const std::size_t slabs = detail::kReduceSlabs;
  const std::size_t chunk = (n + slabs - 1) / slabs;
  std::vector<double> partial(slabs, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long s = 0; s < static_cast<long long>(slabs); ++s) {
    const std::size_t lo = static_cast<std::size_t>(s) * chunk;
    const std::size_t hi = lo + chunk < n ? lo + chunk : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(s)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

/// Serial twin of parallel_sum. Same slab structure so the two agree bit for
/// bit; kept for tests and the kernel benchmark.
template <class F>
double serial_sum(std::size_t n, F&& term) {
  if (n == 0) return 0.0;
  const std::size_t slabs = detail::kReduceSlabs;
  const std::size_t chunk = (n + slabs - 1) / slabs;
  double total = 0.0;
  for (std::size_t s = 0; s < slabs; ++s) {
    const std::size_t lo = s * chunk;
    const std::size_t hi = lo + chunk < n ? lo + chunk : n;
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += term(i);
    total += acc;
  }
  return total;
}

/// Parallel for over [0, n). Body must write disjoint locations.
template <class F>
void parallel_for(std::size_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

/// Serial twin of parallel_for.
template <class F>
void serial_for(std::size_t n, F&& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace hypo
