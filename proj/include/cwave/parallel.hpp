// Data-parallel loops and reductions over grid nodes.
//
// Reductions in deterministic mode sum fixed-size blocks in parallel and then
// combine the block partials serially, so the result does not depend on the
// thread count.  Otherwise an OpenMP reduction is used.

#ifndef CWAVE_PARALLEL_HPP
#define CWAVE_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

namespace cwave {

void set_threads(int n);
int thread_count();
void set_deterministic(bool on);
bool deterministic();

inline constexpr std::size_t kReductionBlock = 4096;

template <class F>
void parallel_for(std::size_t n, F&& body)
{
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

template <class F>
double parallel_sum(std::size_t n, F&& term)
{
  const auto count = static_cast<long long>(n);
  if (deterministic()) {
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    const auto nb = static_cast<long long>(nblocks);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < nb; ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
      const std::size_t hi = std::min(n, lo + kReductionBlock);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += term(i);
      partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
  }
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (long long i = 0; i < count; ++i) total += term(static_cast<std::size_t>(i));
  return total;
}

}  // namespace cwave

#endif  // CWAVE_PARALLEL_HPP
