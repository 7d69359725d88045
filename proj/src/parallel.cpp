#include "hypocoerce/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hypo {

namespace {

int env_thread_request() {
  const char* s = std::getenv("HYPOCOERCE_THREADS");
  if (!s || !*s) return 0;
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0' || v < 1) return 0;
  return static_cast<int>(v);
}

}  // namespace

int worker_count() {
#ifdef _OPENMP
  int req = env_thread_request();
  if (req > 0) return req;
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void apply_thread_env() {
#ifdef _OPENMP
  int req = env_thread_request();
  if (req > 0) omp_set_num_threads(req);
#endif
}

}  // namespace hypo
