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

#ifndef MBQC_BELLTEST_HPP
#define MBQC_BELLTEST_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mbqc/device.hpp"
#include "mbqc/extraction.hpp"
#include "mbqc/parallel.hpp"
#include "mbqc/rng.hpp"
#include "mbqc/stats.hpp"

namespace mbqc {

/// Measurement settings of the 8 groups: (site-1 label, site-2 label).
inline const std::array<std::pair<ObsLabel, ObsLabel>, 8>& test2_settings() {
  static const std::array<std::pair<ObsLabel, ObsLabel>, 8> s = {{
      {ObsLabel::X, ObsLabel::Z},
      {ObsLabel::Z, ObsLabel::X},
      {ObsLabel::A0, ObsLabel::Z},
      {ObsLabel::A0, ObsLabel::X},
      {ObsLabel::A1, ObsLabel::Z},
      {ObsLabel::A1, ObsLabel::X},
      {ObsLabel::X, ObsLabel::X},
      {ObsLabel::Z, ObsLabel::Z},
  }};
  return s;
}

/// Five verdicts over the 8 group averages. The two deterministic
/// correlation checks demand every product equal +1 (a single -1 fails);
/// the probabilistic checks use the c1/sqrt(m) margins.
struct Test2Verdicts {
  bool eq1_xz = false;
  bool eq1_zx = false;
  bool eq2 = false;
  bool eq3 = false;
  bool eq4 = false;
  bool all() const { return eq1_xz && eq1_zx && eq2 && eq3 && eq4; }
};

inline Test2Verdicts compute_test2_verdicts(const std::array<double, 8>& avg,
                                            const std::array<std::int64_t, 8>& minus_counts,
                                            std::int64_t m, double c1) {
  const double margin = c1 / std::sqrt(static_cast<double>(m));
  const double rt2 = std::sqrt(2.0);
  Test2Verdicts v;
  v.eq1_xz = minus_counts[0] == 0;
  v.eq1_zx = minus_counts[1] == 0;
  v.eq2 = avg[2] + avg[3] >= rt2 - margin;
  v.eq3 = avg[4] - avg[5] >= rt2 - margin;
  v.eq4 = std::abs(avg[6] + avg[7]) <= margin;
  return v;
}

struct Test2Report {
  std::int64_t m = 0;
  double c1 = 0;
  std::uint64_t seed = 0;
  std::array<double, 8> group_averages{};
  std::array<std::int64_t, 8> minus_counts{};
  Test2Verdicts verdicts;
  bool pass = false;
};

/// Runs the 8-group Bell-state self-test: 8m copies, seeded random split
/// into 8 groups of m, the fixed settings per group, and the five checks.
/// Per-copy randomness comes from streams derived from (seed, preparation
/// id), so parallel and sequential runs are bit-identical.
inline Test2Report run_test2(const DeviceModel& device, std::int64_t m, double c1,
                             std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("run_test2: m must be >= 1");
  if (!(c1 > 0)) throw std::invalid_argument("run_test2: c1 must be positive");
  if (device.num_sites() != 2) throw std::invalid_argument("run_test2: two-site device expected");

  RngStream root(seed);
  std::vector<std::uint64_t> perm(static_cast<std::size_t>(8 * m));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  RngStream shuffle_rng = root.child(1);
  shuffle(perm, shuffle_rng);

  std::vector<std::int8_t> products(static_cast<std::size_t>(8 * m));
  parallel_for(static_cast<std::uint64_t>(8 * m), [&](std::uint64_t slot) {
    const std::uint64_t group = slot / static_cast<std::uint64_t>(m);
    const std::uint64_t prep_id = perm[slot];
    RngStream rng = root.child(2, prep_id);
    PureState state = device.make_copy(rng);
    const auto& setting = test2_settings()[group];
    BinaryObservable o1 = device.observable(0, setting.first, rng);
    BinaryObservable o2 = device.observable(1, setting.second, rng);
    auto [r1, post] = measure(state, o1, rng);
    auto [r2, post2] = measure(post, o2, rng);
    products[slot] = static_cast<std::int8_t>(r1 * r2);
  });

  Test2Report rep;
  rep.m = m;
  rep.c1 = c1;
  rep.seed = seed;
  for (int g = 0; g < 8; ++g) {
    std::int64_t sum = 0, minus = 0;
    for (std::int64_t j = 0; j < m; ++j) {
      const std::int8_t p = products[static_cast<std::size_t>(g * m + j)];
      sum += p;
      if (p < 0) ++minus;
    }
    rep.group_averages[static_cast<std::size_t>(g)] =
        static_cast<double>(sum) / static_cast<double>(m);
    rep.minus_counts[static_cast<std::size_t>(g)] = minus;
  }
  rep.verdicts = compute_test2_verdicts(rep.group_averages, rep.minus_counts, m, c1);
  rep.pass = rep.verdicts.all();
  return rep;
}

/// Sizes c1 so the probabilistic checks pass jointly with probability
/// beta_accept on the ideal device. Single-test mode solves the exact
/// joint normal form Phi(c)^2 (2 Phi(c/sqrt 2) - 1) = beta; with several
/// tests or sites the per-check tail is (1-beta)/(4 * tests * sites),
/// which reproduces the sqrt(log n) growth.
inline double calibrate_c1(double beta_accept, std::int64_t num_tests = 1,
                           std::int64_t sites_n = 1) {
  if (!(beta_accept > 0.0 && beta_accept < 1.0))
    throw std::invalid_argument("calibrate_c1: beta_accept out of (0,1)");
  if (num_tests < 1 || sites_n < 1)
    throw std::invalid_argument("calibrate_c1: counts must be >= 1");
  const std::int64_t checks = 4 * num_tests * sites_n;
  if (checks <= 4) {
    auto joint = [](double c) {
      return norm_cdf(c) * norm_cdf(c) * (2.0 * norm_cdf(c / std::sqrt(2.0)) - 1.0);
    };
    double lo = 0.0, hi = 1.0;
    while (joint(hi) < beta_accept) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (joint(mid) < beta_accept ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  const double tail = (1.0 - beta_accept) / static_cast<double>(checks);
  return std::sqrt(2.0) * inv_norm_cdf(1.0 - tail);
}

/// Epsilon assignments guaranteed by a passed test:
/// e2 = e3 = c'/m, e4 = e5 = c''/sqrt(m), e1 = 2 e4.
inline EpsilonSet epsilons_from_report(const Test2Report& report, double c_prime = 4.0,
                                       double c_double_prime = 0.0) {
  if (!report.pass) throw std::invalid_argument("epsilons_from_report: report did not pass");
  if (c_double_prime <= 0.0) c_double_prime = 2.0 * report.c1;
  EpsilonSet eps;
  const double m = static_cast<double>(report.m);
  eps.e2 = c_prime / m;
  eps.e3 = c_prime / m;
  eps.e4 = c_double_prime / std::sqrt(m);
  eps.e5 = c_double_prime / std::sqrt(m);
  eps.e1 = 2.0 * eps.e4;
  return eps;
}

inline nlohmann::ordered_json test2_report_to_json(const Test2Report& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["kind"] = "test2_report";
  j["m"] = r.m;
  j["c1"] = r.c1;
  j["seed"] = r.seed;
  j["group_averages"] = r.group_averages;
  j["minus_counts"] = r.minus_counts;
  j["verdicts"] = {{"eq1_xz", r.verdicts.eq1_xz},
                   {"eq1_zx", r.verdicts.eq1_zx},
                   {"eq2", r.verdicts.eq2},
                   {"eq3", r.verdicts.eq3},
                   {"eq4", r.verdicts.eq4}};
  j["pass"] = r.pass;
  if (r.pass) {
    const EpsilonSet eps = epsilons_from_report(r);
    const DeltaChain ch = delta_chain(eps);
    j["epsilons"] = {{"e1", eps.e1}, {"e2", eps.e2}, {"e3", eps.e3},
                     {"e4", eps.e4}, {"e5", eps.e5}};
    j["delta1"] = ch.d1;
    j["delta2"] = ch.d2;
  }
  return j;
}

}  // namespace mbqc

#endif  // MBQC_BELLTEST_HPP
