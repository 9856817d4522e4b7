#include "cwave/parallel.hpp"

#include <omp.h>

namespace cwave {

namespace {
bool g_deterministic = true;
}

void set_threads(int n)
{
  if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

void set_deterministic(bool on) { g_deterministic = on; }

bool deterministic() { return g_deterministic; }

}  // namespace cwave
