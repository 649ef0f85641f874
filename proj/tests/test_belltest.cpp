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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "mbqc/belltest.hpp"
#include "mbqc/device.hpp"

using namespace mbqc;

TEST_CASE("honest device: deterministic groups are exactly 1", "[belltest]") {
  const DeviceModel device = devices::honest_bell();
  const Test2Report rep = run_test2(device, 500, calibrate_c1(0.9), 11);
  REQUIRE(rep.group_averages[0] == 1.0);
  REQUIRE(rep.group_averages[1] == 1.0);
  REQUIRE(rep.minus_counts[0] == 0);
  REQUIRE(rep.minus_counts[1] == 0);
  REQUIRE(rep.verdicts.eq1_xz);
  REQUIRE(rep.verdicts.eq1_zx);
}

TEST_CASE("honest per-copy product distributions are exact", "[belltest]") {
  const DeviceModel device = devices::honest_bell();
  auto p_plus = [&](ObsLabel l1, ObsLabel l2) {
    RngStream dummy(0);
    return product_plus_probability(device.state, device.observable(0, l1, dummy),
                                    device.observable(1, l2, dummy));
  };
  REQUIRE(p_plus(ObsLabel::X, ObsLabel::Z) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(p_plus(ObsLabel::Z, ObsLabel::X) == Catch::Approx(1.0).margin(1e-12));
  // Maximally mixed preparation: everything is a coin flip.
  const DeviceModel mixed = devices::maximally_mixed_bell();
  RngStream dummy(0);
  REQUIRE(product_plus_probability(mixed.state, mixed.observable(0, ObsLabel::X, dummy),
                                   mixed.observable(1, ObsLabel::Z, dummy)) ==
          Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("detectability of wrong preparations", "[belltest]") {
  // Product state |0>|0>: group 2 measures (Z, X) whose product is a
  // fair coin, so the exact-equality check fails except with
  // probability 2^-m.
  const DeviceModel product = devices::product_state_bell();
  RngStream dummy(0);
  REQUIRE(product_plus_probability(product.state, product.observable(0, ObsLabel::Z, dummy),
                                   product.observable(1, ObsLabel::X, dummy)) ==
          Catch::Approx(0.5).margin(1e-12));
  const Test2Report rep = run_test2(product, 20, 2.0, 5);
  REQUIRE_FALSE(rep.pass);

  // Maximally mixed: each deterministic check fails with probability
  // 1 - 2^-m >= 1 - (3/4)^m; verify the analytic statement for m <= 20
  // and the sampled behavior at a fixed seed.
  const DeviceModel mixed = devices::maximally_mixed_bell();
  RngStream dummy2(0);
  for (int g = 0; g < 2; ++g) {
    const auto& s = test2_settings()[static_cast<std::size_t>(g)];
    REQUIRE(product_plus_probability(mixed.state, mixed.observable(0, s.first, dummy2),
                                     mixed.observable(1, s.second, dummy2)) ==
            Catch::Approx(0.5).margin(1e-12));
  }
  for (int m = 1; m <= 20; ++m) {
    const double pass_prob = std::pow(0.5, m);
    REQUIRE(1.0 - pass_prob >= 1.0 - std::pow(0.75, m));
  }
  REQUIRE_FALSE(run_test2(mixed, 20, 2.0, 9).pass);
}

TEST_CASE("reports are bit-identical for identical inputs", "[belltest]") {
  const DeviceModel device = devices::depolarized_bell(0.03);
  const Test2Report a = run_test2(device, 300, 2.5, 99);
  const Test2Report b = run_test2(device, 300, 2.5, 99);
  REQUIRE(test2_report_to_json(a).dump() == test2_report_to_json(b).dump());
  const Test2Report c = run_test2(device, 300, 2.5, 100);
  REQUIRE(test2_report_to_json(a).dump() != test2_report_to_json(c).dump());
}

TEST_CASE("parallel and sequential runs agree bit for bit", "[belltest]") {
  const DeviceModel device = devices::honest_bell();
  setenv("MBQC_SELFTEST_THREADS", "1", 1);
  const Test2Report seq = run_test2(device, 400, 2.0, 7);
  setenv("MBQC_SELFTEST_THREADS", "4", 1);
  const Test2Report par = run_test2(device, 400, 2.0, 7);
  unsetenv("MBQC_SELFTEST_THREADS");
  REQUIRE(test2_report_to_json(seq).dump() == test2_report_to_json(par).dump());
}

TEST_CASE("calibration is monotone and tracks sqrt(log n)", "[belltest]") {
  REQUIRE(calibrate_c1(0.99) > calibrate_c1(0.9));
  REQUIRE(calibrate_c1(0.9) > calibrate_c1(0.5));

  // Multi-site growth: c1(e n)^2 - c1(n)^2 -> 4 for large n.
  const double e = std::exp(1.0);
  const double n = 1e6;
  const double diff = std::pow(calibrate_c1(0.9, 1, static_cast<std::int64_t>(e * n)), 2) -
                      std::pow(calibrate_c1(0.9, 1, static_cast<std::int64_t>(n)), 2);
  REQUIRE(std::abs(diff - 4.0) < 0.6);
  REQUIRE(calibrate_c1(0.9, 1, 100) > calibrate_c1(0.9, 1, 10));
}

TEST_CASE("calibrated pass rate approaches the target", "[belltest]") {
  const double beta = 0.9;
  const double c1 = calibrate_c1(beta);
  const DeviceModel device = devices::honest_bell();
  const int trials = 200;
  int passed = 0;
  for (int t = 0; t < trials; ++t)
    if (run_test2(device, 2000, c1, 1000 + static_cast<std::uint64_t>(t)).pass) ++passed;
  const double rate = static_cast<double>(passed) / trials;
  REQUIRE(std::abs(rate - beta) < 0.08);
}

TEST_CASE("epsilon assignments from a passed report", "[belltest]") {
  Test2Report stub;
  stub.m = 100;
  stub.c1 = 2.0;
  stub.pass = true;
  const EpsilonSet eps = epsilons_from_report(stub, 4.0, 1.0);
  REQUIRE(eps.e4 == Catch::Approx(0.1).margin(1e-15));
  REQUIRE(eps.e5 == Catch::Approx(0.1).margin(1e-15));
  REQUIRE(eps.e1 == Catch::Approx(0.2).margin(1e-15));
  stub.m = 400;
  REQUIRE(epsilons_from_report(stub, 4.0, 1.0).e2 == Catch::Approx(0.01).margin(1e-15));

  // Defaults: c'' = 2 c1.
  stub.m = 100;
  REQUIRE(epsilons_from_report(stub).e4 == Catch::Approx(0.4).margin(1e-15));

  // All epsilons vanish as m grows.
  stub.m = 1'000'000'000'000LL;
  const EpsilonSet tiny = epsilons_from_report(stub);
  REQUIRE(tiny.e1 < 1e-5);
  REQUIRE(tiny.e2 < 1e-11);

  stub.pass = false;
  REQUIRE_THROWS_AS(epsilons_from_report(stub), std::invalid_argument);
}

TEST_CASE("noise hooks perturb copies and measurements", "[belltest]") {
  // Per-copy state hook: strong random rotation of site 0 before each
  // copy is measured. The deterministic correlation checks must break.
  DeviceModel noisy = devices::honest_bell();
  noisy.state_hook = [](const PureState& st, RngStream& rng) {
    return apply_local(st, 0, rotation(rng.next_double() * 1.5));
  };
  const Test2Report rep = run_test2(noisy, 100, 2.0, 3);
  REQUIRE(rep.minus_counts[0] > 0);
  REQUIRE_FALSE(rep.pass);

  // Per-measurement observable hook: jitter below the margin keeps the
  // test passing while still drawing from the copy streams.
  DeviceModel jitter = devices::honest_bell();
  jitter.obs_hook = [](const Matrix& m, int, ObsLabel l, RngStream& rng) {
    if (l == ObsLabel::A0 || l == ObsLabel::A1)
      return rotated(m, 0.002 * (rng.next_double() - 0.5));
    return m;
  };
  const Test2Report rep2 = run_test2(jitter, 400, calibrate_c1(0.95), 8);
  REQUIRE(rep2.pass);
  // Identical seeds still reproduce bit for bit with hooks installed.
  const Test2Report rep3 = run_test2(jitter, 400, calibrate_c1(0.95), 8);
  REQUIRE(test2_report_to_json(rep2).dump() == test2_report_to_json(rep3).dump());
}

TEST_CASE("argument validation", "[belltest]") {
  const DeviceModel device = devices::honest_bell();
  REQUIRE_THROWS_AS(run_test2(device, 0, 2.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(run_test2(device, 10, 0.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(calibrate_c1(1.5), std::invalid_argument);
}
