#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rellevy {

/// Runs fn(block) for block in [0, n_blocks), block b on worker b % threads.
/// The first exception thrown by any worker is rethrown after all join.
template <class Fn>
void parallel_blocks(std::size_t n_blocks, int threads, Fn&& fn) {
  if (threads <= 1 || n_blocks <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  const auto workers = static_cast<std::size_t>(threads) < n_blocks ? static_cast<std::size_t>(threads) : n_blocks;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < n_blocks; b += workers) fn(b);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rellevy
