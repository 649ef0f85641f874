// Copyright 2026 The mbqc-selftest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MBQC_PARALLEL_HPP
#define MBQC_PARALLEL_HPP

#include <cstdlib>
#include <cstdint>
#include <thread>
#include <vector>

namespace mbqc {

/// Thread budget: MBQC_SELFTEST_THREADS, 0 or unset = auto.
inline unsigned thread_budget() {
  unsigned n = 0;
  if (const char* env = std::getenv("MBQC_SELFTEST_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  return n;
}

/// Index-parallel loop. Each index is independent and writes only its own
/// slot, so the result is identical to the sequential run.
template <typename F>
void parallel_for(std::uint64_t count, F&& fn) {
  const unsigned threads = thread_budget();
  if (threads <= 1 || count < 2 * threads) {
    for (std::uint64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::uint64_t chunk = (count + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t lo = t * chunk;
    const std::uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::uint64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace mbqc

#endif  // MBQC_PARALLEL_HPP
