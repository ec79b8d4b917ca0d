#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include "spectral/types.hpp"

namespace spectral::detail {

// Worker count: SPECTRAL_THREADS if set and positive, else the hardware
// concurrency. Read once per process.
int thread_count();

// Runs f(begin, end) over contiguous chunks of [first, last). Chunks never
// overlap, so results do not depend on the worker count as long as f only
// writes inside its own chunk.
template <class F>
void parallel_for(Index first, Index last, Index min_chunk, F&& f) {
  const Index total = last - first;
  if (total <= 0) return;
  const Index workers =
      std::min<Index>(thread_count(), std::max<Index>(1, total / std::max<Index>(1, min_chunk)));
  if (workers <= 1) {
    f(first, last);
    return;
  }
  const Index step = (total + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers - 1));
  for (Index w = 1; w < workers; ++w) {
    const Index b = first + w * step;
    const Index e = std::min(last, b + step);
    if (b >= e) break;
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  f(first, std::min(last, first + step));
  for (auto& t : pool) t.join();
}

}  // namespace spectral::detail
