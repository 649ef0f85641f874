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

#ifndef MBQC_RNG_HPP
#define MBQC_RNG_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mbqc {

/// Counter-based splittable random stream.
///
/// A stream is identified by a 64-bit key; its i-th output is
/// mix(key + i * 0x9E3779B97F4A7C15) where mix is the splitmix64
/// finalizer. Child streams derive a new key from (key, a, b), so any
/// (seed, group, copy) triple maps to a reproducible stream regardless
/// of evaluation order. This scheme is part of the report contract:
/// identical seeds give bit-identical runs, sequential or parallel.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed)), ctr_(0) {}

  /// Independent child stream; deterministic in (key, a, b).
  RngStream child(std::uint64_t a, std::uint64_t b = 0) const {
    RngStream s(0);
    s.key_ = mix(mix(key_ ^ (a * 0xA24BAED4963EE407ULL + 1)) ^
                 (b * 0x9FB21C651E98DF25ULL + 1));
    s.ctr_ = 0;
    return s;
  }

  std::uint64_t next_u64() {
    ctr_ += 0x9E3779B97F4A7C15ULL;
    return mix_raw(key_ + ctr_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    const std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  static std::uint64_t mix_raw(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t mix(std::uint64_t z) {
    return mix_raw(z + 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

/// Fisher-Yates shuffle driven by the stream (descending form).
template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace mbqc

#endif  // MBQC_RNG_HPP
