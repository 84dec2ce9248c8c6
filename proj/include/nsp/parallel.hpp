#ifndef NSP_PARALLEL_HPP
#define NSP_PARALLEL_HPP

#include "nsp/types.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace nsp {

/// Runs body(i) for i in [0, n) on up to `threads` workers with static
/// contiguous chunks. Results must be written to per-index slots. If several
/// indices throw, the exception of the smallest index is rethrown.
template <typename Body>
void parallel_for(Index n, int threads, Body&& body) {
  if (n <= 0) return;
  const Index workers = std::clamp<Index>(threads, 1, n);
  if (workers == 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const Index begin = n * w / workers;
        const Index end = n * (w + 1) / workers;
        for (Index i = begin; i < end; ++i) {
          try {
            body(i);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
            return;
          }
        }
      });
    }
  }
  for (std::size_t w = 0; w < errors.size(); ++w) {
    if (errors[w]) std::rethrow_exception(errors[w]);
  }
}

/// Thread count from NSP_THREADS, or `fallback` when unset or invalid.
inline int threads_from_env(int fallback = 1) {
  if (const char* env = std::getenv("NSP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return fallback;
}

/// Independent generator for stream `stream` of a master seed.
inline std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace nsp

#endif  // NSP_PARALLEL_HPP
