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
#include <set>

#include "mbqc/delegation.hpp"
#include "mbqc/device.hpp"

using namespace mbqc;

namespace {

ColoredGraph triangle() {
  ColoredGraph g = make_colored_graph(3, {{0, 1}, {0, 2}, {1, 2}}, {0, 1, 2});
  compute_partitions(g);
  return g;
}

}  // namespace

TEST_CASE("twirl unitaries", "[delegation]") {
  REQUIRE((twirl_unitary(0) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  Matrix t4(2, 2);
  t4 << 0, -1, 1, 0;
  REQUIRE((twirl_unitary(4) - t4).cwiseAbs().maxCoeff() < 1e-14);
  for (int t = 0; t < 8; ++t) {
    const Matrix u = twirl_unitary(t);
    REQUIRE((u.adjoint() * u - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  }
  REQUIRE_THROWS_AS(twirl_unitary(8), std::invalid_argument);
  REQUIRE_THROWS_AS(twirl_unitary(-1), std::invalid_argument);
}

TEST_CASE("twirl group law with tracked sign", "[delegation]") {
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      const Matrix prod = twirl_unitary(a) * twirl_unitary(b);
      const double sign = (a + b >= 8) ? -1.0 : 1.0;
      const Matrix expect = sign * twirl_unitary((a + b) % 8);
      REQUIRE((prod - expect).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("U(4) maps |0> to |1>", "[delegation]") {
  PureState zero{{2}, Vector::Zero(2)};
  zero.amps(0) = 1.0;
  const PureState one = apply_local(zero, 0, twirl_unitary(4));
  REQUIRE(std::abs(one.amps(1) - Complex(1, 0)) < 1e-14);
}

TEST_CASE("basis orbit bookkeeping matches the matrices", "[delegation]") {
  HonestProver2 honest;
  RngStream dummy(0);
  for (int k = 0; k < 8; ++k) {
    const BasisInstruction instr = angle_index_to_instruction(k);
    const Matrix direct = std::cos(k * M_PI / 4.0) * pauli_x() +
                          std::sin(k * M_PI / 4.0) * pauli_z();
    const Matrix via_label =
        static_cast<double>(instr.sign) * honest.observable(0, instr.label, dummy);
    REQUIRE((direct - via_label).cwiseAbs().maxCoeff() < 1e-14);
  }
  // Compensation really conjugates: W O W^dagger for W = X^b Z^a U(T).
  for (ObsLabel l : {ObsLabel::X, ObsLabel::Z, ObsLabel::A0, ObsLabel::A1})
    for (int t = 0; t < 8; ++t)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          Matrix w = twirl_unitary(t);
          if (a) w = pauli_z() * w;
          if (b) w = pauli_x() * w;
          const Matrix target = w * honest.observable(0, l, dummy) * w.adjoint();
          const BasisInstruction instr = compensate_basis(l, t, a, b);
          const Matrix via =
              static_cast<double>(instr.sign) * honest.observable(0, instr.label, dummy);
          REQUIRE((target - via).cwiseAbs().maxCoeff() < 1e-13);
        }
}

TEST_CASE("compensated distributions equal the untwirled ones exactly", "[delegation]") {
  const ColoredGraph g = triangle();
  for (int t = 0; t < 8; ++t) {
    const std::vector<int> uniform(static_cast<std::size_t>(g.n), t);
    REQUIRE(twirl_compensation_max_error(g, uniform) < 1e-12);
  }
  REQUIRE(twirl_compensation_max_error(g, {3, 5, 1}) < 1e-12);
}

TEST_CASE("teleport masking: T + T' mod 8 is uniform", "[delegation]") {
  for (int t = 0; t < 8; ++t) {
    std::set<int> combined;
    for (int tp = 0; tp < 8; ++tp) combined.insert((t + tp) % 8);
    REQUIRE(combined.size() == 8);
  }
}

TEST_CASE("teleportation moves the qubit up to tracked Paulis", "[delegation]") {
  // Single-qubit states: after undoing X^b Z^a the original returns.
  std::set<std::pair<int, int>> branches;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    PureState psi{{2}, Vector(2)};
    psi.amps(0) = Complex(0.6, 0.0);
    psi.amps(1) = Complex(0.0, 0.8);
    RngStream rng(seed);
    PureState st = psi;
    const auto [a, b] = detail::teleport_site(st, 0, rng);
    branches.insert({a, b});
    Matrix correction = Matrix::Identity(2, 2);
    if (a) correction = pauli_z() * correction;
    if (b) correction = pauli_x() * correction;
    const PureState fixed = apply_local(st, 0, correction.adjoint());
    REQUIRE((fixed.amps - psi.amps).norm() < 1e-12);
  }
  REQUIRE(branches.size() == 4);  // all by-products appear

  // Entanglement is preserved: teleport one half of a Bell pair.
  ColoredGraph pair = make_colored_graph(2, {{0, 1}}, {0, 1});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PureState bell = make_graph_state(pair);
    RngStream rng(100 + seed);
    const auto [a, b] = detail::teleport_site(bell, 0, rng);
    Matrix correction = Matrix::Identity(2, 2);
    if (a) correction = pauli_z() * correction;
    if (b) correction = pauli_x() * correction;
    const PureState fixed = apply_local(bell, 0, correction.adjoint());
    REQUIRE((fixed.amps - make_graph_state(pair).amps).norm() < 1e-12);
  }
}

TEST_CASE("honest delegation passes in both scenarios", "[delegation]") {
  const ColoredGraph g = triangle();
  HonestProver1 p1;
  HonestProver2 p2;
  const DelegationResult trusting =
      run_delegation(g, 6, 3.0, Scenario::trusting, p1, p2, 42);
  REQUIRE(trusting.report.pass);
  REQUIRE(transcript_violations(trusting.transcript).empty());
  for (const auto& [color, defect] : trusting.report.final_defect) REQUIRE(defect <= 1e-12);

  const DelegationResult teleport =
      run_delegation(g, 6, 3.0, Scenario::teleport, p1, p2, 42);
  REQUIRE(teleport.report.pass);
  for (const auto& [color, defect] : teleport.report.final_defect) REQUIRE(defect <= 1e-12);
}

TEST_CASE("transcripts are deterministic and disciplined", "[delegation]") {
  const ColoredGraph g = triangle();
  HonestProver1 p1;
  HonestProver2 p2;
  const DelegationResult a = run_delegation(g, 3, 3.0, Scenario::trusting, p1, p2, 9);
  const DelegationResult b = run_delegation(g, 3, 3.0, Scenario::trusting, p1, p2, 9);
  REQUIRE(transcript_to_jsonl(a.transcript) == transcript_to_jsonl(b.transcript));
  REQUIRE(test4_report_to_json(a.report).dump() == test4_report_to_json(b.report).dump());

  // No twirl vector ever reaches prover 2; state transfers flow 1 -> 2.
  for (const auto& msg : a.transcript) {
    if (msg.kind == "twirl-vector") REQUIRE(msg.receiver != "prover2");
    if (msg.kind == "state-transfer") {
      REQUIRE(msg.sender == "prover1");
      REQUIRE(msg.receiver == "prover2");
    }
    if (msg.kind == "instruction") REQUIRE(msg.sender == "verifier");
  }
}

TEST_CASE("a product-state prover 1 is caught", "[delegation]") {
  const ColoredGraph g = triangle();
  ProductStateProver1 p1;
  HonestProver2 p2;
  const DelegationResult res = run_delegation(g, 10, 3.0, Scenario::trusting, p1, p2, 4);
  REQUIRE_FALSE(res.report.pass);
  bool stabilizer_failed = false;
  for (const auto& v : res.report.stabilizer) stabilizer_failed |= !v.pass;
  REQUIRE(stabilizer_failed);
}

TEST_CASE("teleport scenario carries bell-outcome messages", "[delegation]") {
  const ColoredGraph g = triangle();
  HonestProver1 p1;
  HonestProver2 p2;
  const DelegationResult res = run_delegation(g, 2, 3.0, Scenario::teleport, p1, p2, 15);
  bool saw_bell = false;
  for (const auto& msg : res.transcript)
    if (msg.kind == "bell-outcomes") {
      saw_bell = true;
      REQUIRE(msg.sender == "prover1");
      REQUIRE(msg.receiver == "verifier");
    }
  REQUIRE(saw_bell);
}

TEST_CASE("measurement stages never reorder", "[delegation]") {
  const ColoredGraph g = triangle();
  AdaptivePlan plan;
  plan.order = {2, 0, 1};
  plan.choose = [](int step, const std::vector<int>& prior) {
    if (step == 0) return PlanChoice::X;
    return prior.back() == +1 ? PlanChoice::Z : PlanChoice::A0;
  };
  const auto schedule = measurement_stage_schedule(g, plan);
  REQUIRE(schedule.size() == 3);
  REQUIRE(schedule[0].site == 2);
  REQUIRE(schedule[1].site == 0);
  REQUIRE(schedule[2].site == 1);
  REQUIRE(schedule[0].bases_across_histories.size() == 1);
  REQUIRE(schedule[1].bases_across_histories.size() == 2);  // Z or A0
  REQUIRE(schedule[2].bases_across_histories.size() == 2);

  ColoredGraph single = make_colored_graph(1, {}, {0});
  AdaptivePlan one;
  one.order = {0};
  one.choose = [](int, const std::vector<int>&) { return PlanChoice::X; };
  REQUIRE(measurement_stage_schedule(single, one).size() == 1);

  AdaptivePlan broken;
  broken.order = {0, 0, 1};
  broken.choose = one.choose;
  REQUIRE_THROWS_AS(measurement_stage_schedule(g, broken), std::invalid_argument);
}
