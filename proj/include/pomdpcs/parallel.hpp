#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace pomdpcs {

/// Calls body(begin, end) on contiguous chunks of [0, n). Chunks are fixed by
/// `workers`, never by scheduling, so any result written per index is
/// identical for every worker count.
template <typename Body>
void parallel_for(std::size_t n, int workers, Body&& body) {
  const std::size_t w = static_cast<std::size_t>(std::max(1, workers));
  if (w == 1 || n < 2 * w) {
    body(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + w - 1) / w;
  std::vector<std::jthread> threads;
  threads.reserve(w - 1);
  for (std::size_t t = 1; t < w; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    threads.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::size_t{0}, std::min(n, chunk));
}

}  // namespace pomdpcs
