#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace tgprior {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of stream `index` under `master`; independent of scheduling.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 stream_rng(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(stream_seed(master, index));
}

// Runs body(i) for i in [0, count) on up to hardware_concurrency threads with
// a static block split. Callers write into per-index slots and reduce in
// index order, so results do not depend on the thread count.
template <class Body>
void parallel_for(long long count, Body body, unsigned threads = 0) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<long long>(threads, std::max(count, 1LL)));
  if (threads <= 1) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const long long chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const long long b = t * chunk, e = std::min(count, b + chunk);
    if (b >= e) break;
    pool.emplace_back([b, e, &body] {
      for (long long i = b; i < e; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace tgprior
