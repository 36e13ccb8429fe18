#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "byzsprt/common.hpp"

namespace byzsprt {

/// 0 means "one worker per hardware thread".
inline int resolve_threads(int requested) {
  if (requested < 0) throw ConfigError("threads must be >= 0");
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Fixed chunk width for trial grids. Results that are merged per chunk in
/// chunk order come out identical for every thread count, because the grid
/// depends only on n.
constexpr std::uint64_t kChunkSize = 4096;

inline std::uint64_t chunk_count(std::uint64_t n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Calls body(chunk_index, begin, end) for every chunk of [0, n), spreading
/// chunks over `threads` workers. The first exception thrown by any chunk is
/// rethrown here; remaining workers stop at their next chunk boundary.
inline void run_chunked(std::uint64_t n, int threads,
                        const std::function<void(std::uint64_t, std::uint64_t, std::uint64_t)>& body) {
  const std::uint64_t n_chunks = chunk_count(n);
  if (threads <= 1 || n_chunks <= 1) {
    for (std::uint64_t ci = 0; ci < n_chunks; ++ci)
      body(ci, ci * kChunkSize, std::min(n, (ci + 1) * kChunkSize));
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::uint64_t ci = next.fetch_add(1, std::memory_order_relaxed);
      if (ci >= n_chunks) return;
      try {
        body(ci, ci * kChunkSize, std::min(n, (ci + 1) * kChunkSize));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  const auto n_workers =
      static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n_chunks));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace byzsprt
