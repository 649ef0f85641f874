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

#ifndef MBQC_STATS_HPP
#define MBQC_STATS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace mbqc {

// ---------------------------------------------------------------------------
// Normal quantiles
// ---------------------------------------------------------------------------

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal quantile. Rational approximation (Acklam) refined by one
/// Halley step against erfc; absolute error well below 1e-9 on (0,1).
inline double inv_norm_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("inv_norm_cdf: q must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (q < plow) {
    const double u = std::sqrt(-2.0 * std::log(q));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (q <= 1.0 - plow) {
    const double u = q - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - q));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  // Halley refinement.
  const double e = norm_cdf(x) - q;
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  const double u = e / pdf;
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

// ---------------------------------------------------------------------------
// Binomial tails and percent points
// ---------------------------------------------------------------------------

/// Exact upper tail P(X >= x) for X ~ Binomial(m, p). All terms are
/// positive, summed in extended precision from the smallest.
inline double binom_tail_upper(std::int64_t m, double p, std::int64_t x) {
  if (m < 1) throw std::invalid_argument("binom_tail_upper: m must be >= 1");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binom_tail_upper: p out of [0,1]");
  if (x < 0 || x > m + 1) throw std::invalid_argument("binom_tail_upper: x out of [0,m+1]");
  if (x <= 0) return 1.0;
  if (x > m) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // term(k) = C(m,k) p^k (1-p)^(m-k), accumulated from k=m down to x.
  long double lp = static_cast<long double>(p);
  long double lq = 1.0L - lp;
  // log-space start to survive large m.
  long double log_term = static_cast<long double>(m) * std::log(lq);
  for (std::int64_t k = 1; k <= x; ++k)
    log_term += std::log(static_cast<long double>(m - k + 1) / static_cast<long double>(k)) +
                std::log(lp) - std::log(lq);
  long double term = std::exp(log_term);  // term at k = x
  long double sum = 0.0L;
  // Ascend from x to m, accumulating; ratio keeps each step exact-ish.
  for (std::int64_t k = x; k <= m; ++k) {
    sum += term;
    term *= static_cast<long double>(m - k) / static_cast<long double>(k + 1) * lp / lq;
  }
  if (sum > 1.0L) sum = 1.0L;
  return static_cast<double>(sum);
}

/// x+(p) = min{ x | P(X >= x) <= alpha }. Returns m+1 when even x = m
/// fails (explicit sentinel, never clamped).
inline std::int64_t percent_point_upper(std::int64_t m, double p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("percent_point_upper: alpha must be in (0,1)");
  for (std::int64_t x = 0; x <= m; ++x)
    if (binom_tail_upper(m, p, x) <= alpha) return x;
  return m + 1;
}

/// x-(p) = max{ x | P(X <= x) <= alpha }. Returns -1 when even x = 0 fails.
inline std::int64_t percent_point_lower(std::int64_t m, double p, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("percent_point_lower: alpha must be in (0,1)");
  for (std::int64_t x = m; x >= 0; --x) {
    const double lower_tail = 1.0 - binom_tail_upper(m, p, x + 1);
    if (lower_tail <= alpha) return x;
  }
  return -1;
}

// ---------------------------------------------------------------------------
// Acceptance tests
// ---------------------------------------------------------------------------

enum class TestKind { two_sided, one_sided_lower, zero_test };

/// Acceptance test parameters. beta_tail is the per-side tail mass: the
/// two-sided test passes ideal data with probability 1 - 2*beta_tail, the
/// one-sided variant with 1 - beta_tail (both reported in
/// acceptance_probability()).
struct TestSpec {
  std::int64_t m = 1;
  double p_star = 0.5;
  double alpha = 0.05;
  double beta_tail = 0.05;
  TestKind kind = TestKind::two_sided;

  void check_valid() const {
    if (m < 1) throw std::invalid_argument("TestSpec: m must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("TestSpec: alpha out of (0,1)");
    if (!(beta_tail > 0.0 && beta_tail < 1.0))
      throw std::invalid_argument("TestSpec: beta_tail out of (0,1)");
    if (p_star < 0.0 || p_star > 1.0) throw std::invalid_argument("TestSpec: p_star out of [0,1]");
  }

  double acceptance_probability() const {
    return kind == TestKind::two_sided ? 1.0 - 2.0 * beta_tail : 1.0 - beta_tail;
  }
};

/// Post-test conclusion interval for the underlying probability p.
/// upper may be +infinity for one-sided conclusions.
struct IntervalConclusion {
  double lower = 0.0;
  double upper = 0.0;
  double significance = 0.0;
};

/// Acceptance region [m p* - sqrt(m) z_beta s, m p* + sqrt(m) z_beta s]
/// with s = sqrt(p*(1-p*)) and z_beta the upper-tail normal quantile of
/// beta_tail; half interval for the one-sided variant. On pass, the
/// conclusion interval widens each side by z_alpha * s / sqrt(m).
inline std::pair<bool, IntervalConclusion> run_test_T(const TestSpec& spec,
                                                      std::int64_t x_observed) {
  spec.check_valid();
  if (spec.kind == TestKind::zero_test)
    throw std::invalid_argument("run_test_T: use run_test_zero for the zero test");
  if (spec.p_star == 0.0 || spec.p_star == 1.0)
    throw std::invalid_argument("run_test_T: degenerate p_star; use the zero test");
  if (x_observed < 0 || x_observed > spec.m)
    throw std::invalid_argument("run_test_T: x out of range");
  const double s = std::sqrt(spec.p_star * (1.0 - spec.p_star));
  const double z_beta = inv_norm_cdf(1.0 - spec.beta_tail);
  const double z_alpha = inv_norm_cdf(1.0 - spec.alpha);
  const double center = static_cast<double>(spec.m) * spec.p_star;
  const double half = std::sqrt(static_cast<double>(spec.m)) * z_beta * s;
  const double x = static_cast<double>(x_observed);
  bool pass;
  if (spec.kind == TestKind::two_sided)
    pass = (x >= center - half) && (x <= center + half);
  else
    pass = x >= center - half;
  IntervalConclusion conc;
  conc.significance = spec.alpha;
  const double w = (z_beta + z_alpha) * s / std::sqrt(static_cast<double>(spec.m));
  conc.lower = spec.p_star - w;
  conc.upper = spec.kind == TestKind::two_sided ? spec.p_star + w
                                                : std::numeric_limits<double>::infinity();
  return {pass, conc};
}

/// T(m,0): pass iff no success observed; on pass the success probability
/// of a fresh draw is below (1-alpha)/(m*alpha) at significance alpha.
inline std::pair<bool, double> run_test_zero(std::int64_t m, std::int64_t x_observed,
                                             double alpha) {
  if (m < 1) throw std::invalid_argument("run_test_zero: m must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("run_test_zero: alpha out of (0,1)");
  if (x_observed < 0 || x_observed > m) throw std::invalid_argument("run_test_zero: x out of range");
  return {x_observed == 0, (1.0 - alpha) / (static_cast<double>(m) * alpha)};
}

// ---------------------------------------------------------------------------
// Hypergeometric distribution
// ---------------------------------------------------------------------------

namespace detail {

using u128 = unsigned __int128;

/// C(n, k) exactly; requires n <= 64 so everything fits in 64 bits.
inline std::uint64_t binom_u64(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n || n < 0) return 0;
  if (k > n - k) k = n - k;
  u128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * static_cast<u128>(n - k + i) / static_cast<u128>(i);
  }
  return static_cast<std::uint64_t>(r);
}

inline u128 gcd_u128(u128 a, u128 b) {
  while (b != 0) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace detail

/// Exact reduced fraction C(m,x) C(n-m,k-x) / C(n,k) for n <= 64.
inline std::pair<std::uint64_t, std::uint64_t> hypergeom_pmf_exact(std::int64_t n, std::int64_t m,
                                                                   std::int64_t k,
                                                                   std::int64_t x) {
  if (n < 0 || m < 0 || m > n || k < 0 || k > n)
    throw std::invalid_argument("hypergeom_pmf_exact: parameters out of range");
  if (n > 64) throw std::invalid_argument("hypergeom_pmf_exact: exact mode needs n <= 64");
  const detail::u128 num = static_cast<detail::u128>(detail::binom_u64(m, x)) *
                           static_cast<detail::u128>(detail::binom_u64(n - m, k - x));
  const detail::u128 den = detail::binom_u64(n, k);
  if (den == 0) throw std::invalid_argument("hypergeom_pmf_exact: empty sample space");
  const detail::u128 g = num == 0 ? den : detail::gcd_u128(num, den);
  return {static_cast<std::uint64_t>(num / g), static_cast<std::uint64_t>(den / g)};
}

/// P_HG(n,m,k)(x) with the convention C(a,b) = 0 outside 0 <= b <= a.
/// Exact rational arithmetic for n <= 64, log-gamma above.
inline double hypergeom_pmf(std::int64_t n, std::int64_t m, std::int64_t k, std::int64_t x) {
  if (n < 0 || m < 0 || m > n || k < 0 || k > n)
    throw std::invalid_argument("hypergeom_pmf: parameters out of range");
  if (x < 0 || x > m || k - x < 0 || k - x > n - m) return 0.0;
  if (n <= 64) {
    const auto [num, den] = hypergeom_pmf_exact(n, m, k, x);
    return static_cast<double>(num) / static_cast<double>(den);
  }
  auto lb = [](std::int64_t a, std::int64_t b) {
    return std::lgammal(static_cast<long double>(a + 1)) -
           std::lgammal(static_cast<long double>(b + 1)) -
           std::lgammal(static_cast<long double>(a - b + 1));
  };
  const long double lg = lb(m, x) + lb(n - m, k - x) - lb(n, k);
  return static_cast<double>(std::exp(lg));
}

/// Var(X) = (n-m) m (n-k) k / ((n-1) n^2) <= m/4.
inline double hypergeom_variance(std::int64_t n, std::int64_t m, std::int64_t k) {
  if (n < 2) throw std::invalid_argument("hypergeom_variance: n must be >= 2");
  if (m < 0 || m > n || k < 0 || k > n)
    throw std::invalid_argument("hypergeom_variance: parameters out of range");
  const double nn = static_cast<double>(n);
  return static_cast<double>(n - m) * static_cast<double>(m) * static_cast<double>(n - k) *
         static_cast<double>(k) / ((nn - 1.0) * nn * nn);
}

/// c(alpha,beta) with c^2 = (1/2 + n/(n-m) z_beta sqrt(p*(1-p*)))^2 / alpha,
/// z_beta the upper-tail quantile. Monotone increasing in n/(n-m).
inline double soundness_constant(std::int64_t n, std::int64_t m, double p_star, double alpha,
                                 double beta_tail) {
  if (m < 1 || n <= m) throw std::invalid_argument("soundness_constant: need n > m >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("soundness_constant: alpha out of (0,1)");
  const double z_beta = inv_norm_cdf(1.0 - beta_tail);
  const double ratio = static_cast<double>(n) / static_cast<double>(n - m);
  const double base = 0.5 + ratio * z_beta * std::sqrt(p_star * (1.0 - p_star));
  return base / std::sqrt(alpha);
}

}  // namespace mbqc

#endif  // MBQC_STATS_HPP
