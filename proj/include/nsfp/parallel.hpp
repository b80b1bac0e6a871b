#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace nsfp {

/// Worker count used by the solvers' row loops (default 1).
void set_threads(int n);
int threads();

/// Runs f(lo, hi) over disjoint chunks of [begin, end). Every index is written by
/// exactly one worker, so results do not depend on the thread count.
template <class F>
void parallel_for(int begin, int end, F&& f)
{
  const int total = end - begin;
  const int workers = std::min(threads(), total);
  if (workers <= 1) {
    if (total > 0)
      f(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (total + workers - 1) / workers;
  for (int w = 1; w < workers; ++w) {
    const int lo = begin + w * chunk, hi = std::min(end, lo + chunk);
    if (lo < hi)
      pool.emplace_back([&f, lo, hi] { f(lo, hi); });
  }
  f(begin, std::min(end, begin + chunk));
  for (auto& t : pool)
    t.join();
}

} // namespace nsfp
