#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace costat {

// Runs fn(chunk_index, begin, end) over [0, total) in fixed-size chunks.
// Chunk boundaries depend only on total and chunk_size, never on the worker
// count, so per-chunk results combined in chunk order give output that is
// bit-identical for any number of workers.
template <typename Fn>
void for_each_chunk(std::size_t total, std::size_t chunk_size, int workers, Fn&& fn) {
  if (total == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t n_chunks = (total + chunk_size - 1) / chunk_size;
  auto run = [&](std::size_t c) {
    const std::size_t begin = c * chunk_size;
    const std::size_t end = std::min(total, begin + chunk_size);
    fn(c, begin, end);
  };
  if (workers <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run(c);
    return;
  }
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n_chunks);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) run(c);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace costat
