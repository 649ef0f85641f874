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

// Brute-force cross-checks. Everything here recomputes results by a
// route independent of the main implementation: subset counting instead
// of closed-form binomials, power iteration instead of SVD.

#ifndef MBQC_ORACLES_HPP
#define MBQC_ORACLES_HPP

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mbqc/linalg.hpp"
#include "mbqc/rng.hpp"

namespace mbqc::oracles {

using u128 = unsigned __int128;

/// C(n,k) by the Pascal recurrence.
inline u128 pascal_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<u128> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j - 1)];
  return row[static_cast<std::size_t>(k)];
}

/// Number of k-subsets of {1..n} containing exactly x of the first m
/// items, by dynamic programming over items (no closed form).
inline u128 count_subsets_dp(int n, int m, int k, int x) {
  if (k < 0 || k > n || x < 0) return 0;
  // ways[j][l]: subsets of the items seen so far with j chosen overall
  // and l chosen among the marked ones.
  std::vector<std::vector<u128>> ways(static_cast<std::size_t>(k) + 1,
                                      std::vector<u128>(static_cast<std::size_t>(k) + 1, 0));
  ways[0][0] = 1;
  for (int item = 0; item < n; ++item) {
    const bool marked = item < m;
    for (int j = std::min(item + 1, k); j >= 1; --j)
      for (int l = j; l >= 0; --l) {
        if (marked && l >= 1)
          ways[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] +=
              ways[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(l - 1)];
        if (!marked)
          ways[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] +=
              ways[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(l)];
      }
  }
  if (x > k) return 0;
  return ways[static_cast<std::size_t>(k)][static_cast<std::size_t>(x)];
}

/// Literal bitmask enumeration, n <= 20.
inline u128 count_subsets_bitmask(int n, int m, int k, int x) {
  if (n > 20) throw std::invalid_argument("count_subsets_bitmask: n too large");
  u128 count = 0;
  const std::uint32_t top = 1u << n;
  for (std::uint32_t mask = 0; mask < top; ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    const std::uint32_t marked = mask & ((1u << m) - 1u);
    if (__builtin_popcount(marked) == x) ++count;
  }
  return count;
}

/// Reduced fraction (count / C(n,k)).
inline std::pair<std::uint64_t, std::uint64_t> hypergeom_fraction_dp(int n, int m, int k, int x) {
  const u128 num = count_subsets_dp(n, m, k, x);
  const u128 den = pascal_binomial(n, k);
  if (den == 0) throw std::invalid_argument("hypergeom_fraction_dp: empty sample space");
  u128 a = num, b = den;
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  const u128 g = num == 0 ? den : a;
  return {static_cast<std::uint64_t>(num / g), static_cast<std::uint64_t>(den / g)};
}

/// Spectral norm by plain power iteration on A^dagger A; independent of
/// the SVD route.
inline double power_iteration_norm(const Matrix& a, int iters = 2000) {
  const Matrix g = a.adjoint() * a;
  Vector v = Vector::Zero(g.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = Complex(1.0 / std::sqrt(static_cast<double>(v.size() + i + 1)), 0.1 * (i % 3));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = g * v;
    const double nxt = w.norm();
    if (nxt == 0.0) return 0.0;
    w /= nxt;
    lambda = nxt;
    v = w;
  }
  return std::sqrt(lambda);
}

/// Seeded random complex matrix with entries in the unit square.
inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = Complex(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
  return m;
}

}  // namespace mbqc::oracles

#endif  // MBQC_ORACLES_HPP
