#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bpk::detail {

// Splits [0, count) into contiguous blocks, one per worker. Each index is
// handled by exactly one worker, so per-index results never depend on the
// worker count.
template <class Fn>
void parallel_blocks(std::size_t count, unsigned workers, Fn&& fn) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  if (w <= 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w - 1);
  const std::size_t chunk = (count + w - 1) / w;
  for (std::size_t t = 1; t < w; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(std::size_t{0}, std::min(count, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace bpk::detail
