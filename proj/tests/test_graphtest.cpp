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
#include <fstream>

#include "mbqc/device.hpp"
#include "mbqc/graphtest.hpp"

using namespace mbqc;

namespace {

ColoredGraph triangle() {
  ColoredGraph g = make_colored_graph(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 1, 2});
  compute_partitions(g);
  return g;
}

ColoredGraph path3() {
  ColoredGraph g = make_colored_graph(3, {{0, 1}, {1, 2}}, {0, 1, 0});
  compute_partitions(g);
  return g;
}

ColoredGraph load_fixture(const std::string& name) {
  std::ifstream f(std::string(MBQC_TEST_DATA_DIR) + "/" + name);
  REQUIRE(f.good());
  nlohmann::json j;
  f >> j;
  return graph_from_json(j);
}

std::function<std::pair<Matrix, int>(int, ObsLabel)> exact_realize(const DeviceModel& device) {
  return [&device](int site, ObsLabel l) {
    return std::pair<Matrix, int>(device.base_observable(site, l), +1);
  };
}

/// Device whose chosen site is replaced by a maximally mixed qubit: the
/// site's qubit is swapped with half of a fresh Bell pair, the pair
/// folded into that site's dimension (2 -> 8).
DeviceModel mixed_site_graph(const ColoredGraph& g, int site) {
  DeviceModel honest = devices::honest_graph(g);
  DeviceModel d;
  d.dims = honest.dims;
  d.dims[static_cast<std::size_t>(site)] = 8;
  d.state.dims = d.dims;
  const Eigen::Index total = honest.state.total_dim();
  d.state.amps = Vector::Zero(total * 4);
  std::vector<Eigen::Index> stride(honest.dims.size());
  Eigen::Index s = 1;
  for (int j = static_cast<int>(honest.dims.size()) - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= honest.dims[static_cast<std::size_t>(j)];
  }
  std::vector<Eigen::Index> out_stride(d.dims.size());
  s = 1;
  for (int j = static_cast<int>(d.dims.size()) - 1; j >= 0; --j) {
    out_stride[static_cast<std::size_t>(j)] = s;
    s *= d.dims[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    for (Eigen::Index q = 0; q < 2; ++q) {
      Eigen::Index out = 0;
      for (std::size_t j = 0; j < honest.dims.size(); ++j) {
        const Eigen::Index digit = (idx / stride[j]) % honest.dims[j];
        if (static_cast<int>(j) == site) {
          // site composite: (held qubit q, env a = old qubit, env b = q)
          out += (q * 4 + digit * 2 + q) * out_stride[j];
        } else {
          out += digit * out_stride[j];
        }
      }
      d.state.amps(out) += honest.state.amps(idx) / std::sqrt(2.0);
    }
  }
  d.observables = honest.observables;
  const Matrix id4 = Matrix::Identity(4, 4);
  for (std::size_t l = 0; l < 4; ++l)
    d.observables[static_cast<std::size_t>(site)][l] =
        kron(devices::qubit_observables()[l], id4);
  return d;
}

}  // namespace

TEST_CASE("honest stabilizer tests pass every copy", "[graphtest]") {
  const ColoredGraph g = triangle();
  const DeviceModel device = devices::honest_graph(g);
  for (int color : g.colors()) {
    const StabilizerVerdict v = run_stabilizer_test(device, g, color, 40, 7);
    REQUIRE(v.pass);
    REQUIRE(v.failed_copies == 0);
  }
}

TEST_CASE("honest stabilizer pass probability is exactly 1", "[graphtest]") {
  std::vector<ColoredGraph> corpus = {triangle(), path3(), load_fixture("fig2a.json"),
                                      triangular_lattice(2, 2), triangular_lattice(2, 3),
                                      triangular_lattice(3, 3), triangular_lattice(2, 5)};
  for (const auto& g : corpus) {
    const DeviceModel device = devices::honest_graph(g);
    for (int color : g.colors()) {
      const double p =
          stabilizer_pass_probability(device.state, exact_realize(device), g, color);
      REQUIRE(p == Catch::Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("a Z flip is detected deterministically in its color", "[graphtest]") {
  const ColoredGraph g = triangle();
  const int site = 2;  // red
  const DeviceModel device = devices::z_flip_graph(g, site);
  const int color = g.coloring[static_cast<std::size_t>(site)];
  const double p = stabilizer_pass_probability(device.state, exact_realize(device), g, color);
  REQUIRE(p == Catch::Approx(0.0).margin(1e-12));
  const StabilizerVerdict v = run_stabilizer_test(device, g, color, 25, 3);
  REQUIRE_FALSE(v.pass);
  REQUIRE(v.failed_copies == 25);
}

TEST_CASE("a maximally mixed site fails its check half the time", "[graphtest]") {
  const ColoredGraph g = triangle();
  const int site = 2;
  const DeviceModel device = mixed_site_graph(g, site);
  device.check_valid();
  const int color = g.coloring[static_cast<std::size_t>(site)];
  const double p = stabilizer_pass_probability(device.state, exact_realize(device), g, color);
  REQUIRE(p == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("a missing edge is detected with per-copy probability >= 1/2", "[graphtest]") {
  const ColoredGraph g = triangle();
  const DeviceModel device = devices::missing_edge_graph(g, {0, 1});
  double min_pass = 1.0;
  for (int color : g.colors())
    min_pass = std::min(min_pass, stabilizer_pass_probability(device.state,
                                                              exact_realize(device), g, color));
  REQUIRE(min_pass <= 0.5 + 1e-12);
  const Test4Report rep = run_test4(device, g, 12, 3.0, 5);
  REQUIRE_FALSE(rep.pass);
}

TEST_CASE("reduction yields exact Bell pairs on honest devices", "[graphtest]") {
  std::vector<ColoredGraph> corpus = {triangle(), path3(), load_fixture("fig2a.json"),
                                      triangular_lattice(2, 2), triangular_lattice(2, 3),
                                      triangular_lattice(3, 3), triangular_lattice(2, 5)};
  for (const auto& g : corpus) {
    auto dev = std::make_shared<const DeviceModel>(devices::honest_graph(g));
    for (int color : g.colors()) {
      const auto& subsets = g.partitions.at(color);
      for (const auto& subset : subsets) {
        const auto partners = choose_partners(g, subset);
        for (std::uint64_t copy = 0; copy < 3; ++copy) {
          CopySource source = direct_copy_source(dev, RngStream(11 + copy));
          PreparedCopy pc = source(copy);
          const ReducedPairs red = reduce_copy(pc, g, color, subset, partners);
          for (const auto& [a, b] : red.pairs) {
            REQUIRE(pair_bell_fidelity(red.state, a, b) == Catch::Approx(1.0).margin(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("triangle reduction produces the Bell state on (black, partner)", "[graphtest]") {
  const ColoredGraph g = triangle();
  auto dev = std::make_shared<const DeviceModel>(devices::honest_graph(g));
  CopySource source = direct_copy_source(dev, RngStream(5));
  for (std::uint64_t copy = 0; copy < 10; ++copy) {
    PreparedCopy pc = source(copy);
    const auto partners = choose_partners(g, {0});
    const ReducedPairs red = reduce_copy(pc, g, 0, {0}, partners);
    REQUIRE(red.pairs.size() == 1);
    REQUIRE(pair_bell_fidelity(red.state, red.pairs[0].first, red.pairs[0].second) ==
            Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("single-vertex graph rejects the color protocol", "[graphtest]") {
  ColoredGraph g = make_colored_graph(1, {}, {0});
  g.partitions[0] = {{0}};
  auto dev = std::make_shared<const DeviceModel>(devices::honest_graph(g));
  CopySource source = direct_copy_source(dev, RngStream(1));
  std::vector<std::vector<std::uint64_t>> groups(8, std::vector<std::uint64_t>{0});
  REQUIRE_THROWS_AS(run_color_protocol(source, groups, g, 0, 0, {0}, 2.0),
                    std::invalid_argument);
}

TEST_CASE("conflicting subsets are rejected", "[graphtest]") {
  const ColoredGraph g = path3();
  auto dev = std::make_shared<const DeviceModel>(devices::honest_graph(g));
  CopySource source = direct_copy_source(dev, RngStream(1));
  std::vector<std::vector<std::uint64_t>> groups(8, std::vector<std::uint64_t>{0});
  REQUIRE_THROWS_AS(run_color_protocol(source, groups, g, 0, 0, {0, 2}, 2.0),
                    std::invalid_argument);
}

TEST_CASE("test4 passes honestly and accounts for every copy", "[graphtest]") {
  const ColoredGraph g = triangular_lattice(2, 2);
  const DeviceModel device = devices::honest_graph(g);
  const Test4Report rep = run_test4(device, g, 8, 3.0, 13);
  REQUIRE(rep.pass);
  REQUIRE(rep.c3 == group_count(g));
  REQUIRE(rep.copies_consumed == rep.c3 * 8 + 1);
  for (const auto& [color, defect] : rep.final_defect) REQUIRE(defect <= 1e-12);
  for (const auto& t : rep.site_tests) {
    REQUIRE(t.pass);
    REQUIRE(t.minus_counts[0] == 0);
    REQUIRE(t.minus_counts[1] == 0);
  }
}

TEST_CASE("four-color graphs run through the same path", "[graphtest]") {
  const ColoredGraph g = load_fixture("fourcolor.json");
  const DeviceModel device = devices::honest_graph(g);
  const Test4Report rep = run_test4(device, g, 5, 3.0, 21);
  REQUIRE(rep.pass);
  REQUIRE(rep.k == 4);
  REQUIRE(rep.c3 == 44);
  REQUIRE(rep.copies_consumed == 44 * 5 + 1);
}

TEST_CASE("test4 reports are bit-identical for a fixed seed", "[graphtest]") {
  const ColoredGraph g = triangle();
  const DeviceModel device = devices::honest_graph(g);
  const Test4Report a = run_test4(device, g, 6, 2.5, 77);
  const Test4Report b = run_test4(device, g, 6, 2.5, 77);
  REQUIRE(test4_report_to_json(a).dump() == test4_report_to_json(b).dump());
}

TEST_CASE("corrupted states fail with overwhelming probability", "[graphtest]") {
  const ColoredGraph g = triangle();
  const DeviceModel device = devices::missing_edge_graph(g, {0, 1});
  int fails = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    if (!run_test4(device, g, 10, 3.0, seed).pass) ++fails;
  REQUIRE(fails == 10);
}

TEST_CASE("certified guarantees from a passed report", "[graphtest]") {
  Test4Report stub;
  stub.n = 9;
  stub.m = 10000;
  stub.pass = true;
  stub.final_defect = {{0, 0.0}, {1, 0.0}, {2, 2e-5}};
  const Test4Guarantees out = test4_guarantees(stub, 0.05, 1.0);
  REQUIRE(out.delta == Catch::Approx(0.121749).margin(1e-5));
  REQUIRE(out.defect_threshold == Catch::Approx(5e-6).margin(1e-12));
  REQUIRE(out.flagged_colors == std::vector<int>{2});

  stub.final_defect[2] = 0.0;
  REQUIRE(test4_guarantees(stub, 0.05).flagged_colors.empty());

  // n = e, m = e gives delta = c2 exactly.
  Test4Report euler = stub;
  euler.n = 3;
  euler.m = 3;
  const double log_over_m = std::log(3.0) / 3.0;
  REQUIRE(test4_guarantees(euler, 0.05, 2.0).delta ==
          Catch::Approx(2.0 * std::pow(log_over_m, 0.25)).margin(1e-12));

  stub.pass = false;
  REQUIRE_THROWS_AS(test4_guarantees(stub, 0.05), std::invalid_argument);
}

TEST_CASE("site table CSV has one row per tested site", "[graphtest]") {
  const ColoredGraph g = triangle();
  const Test4Report rep = run_test4(devices::honest_graph(g), g, 4, 3.0, 2);
  const std::string csv = test4_site_table_csv(rep);
  const auto rows = std::count(csv.begin(), csv.end(), '\n');
  REQUIRE(rows == 1 + static_cast<long>(rep.site_tests.size()));
}
