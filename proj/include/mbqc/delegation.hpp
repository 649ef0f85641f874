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

#ifndef MBQC_DELEGATION_HPP
#define MBQC_DELEGATION_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbqc/certify.hpp"
#include "mbqc/device.hpp"
#include "mbqc/graphtest.hpp"
#include "mbqc/hilbert.hpp"
#include "mbqc/linalg.hpp"

namespace mbqc {

// ---------------------------------------------------------------------------
// Discrete twirling
// ---------------------------------------------------------------------------

/// U(T): rotation by pi*T/8, T in {0..7}.
inline Matrix twirl_unitary(int t) {
  if (t < 0 || t > 7) throw std::invalid_argument("twirl_unitary: T must be in {0..7}");
  return rotation(M_PI * t / 8.0);
}

struct TwirlVector {
  std::vector<int> t;
  std::optional<std::vector<int>> t_prime;

  void check_valid() const {
    for (int v : t)
      if (v < 0 || v > 7) throw std::invalid_argument("TwirlVector: entry out of {0..7}");
    if (t_prime)
      for (int v : *t_prime)
        if (v < 0 || v > 7) throw std::invalid_argument("TwirlVector: t' entry out of {0..7}");
  }
};

/// The X-Z plane observables O(k) = cos(k pi/4) X + sin(k pi/4) Z form a
/// closed orbit under conjugation by U(T) (angle shift of -T) and by the
/// Pauli by-products (k -> 4-k for Z, k -> -k for X). Every O(k) is one
/// of the four device labels up to an outcome sign.
struct BasisInstruction {
  ObsLabel label = ObsLabel::X;
  int sign = +1;
};

inline int obs_label_angle_index(ObsLabel l) {
  switch (l) {
    case ObsLabel::X: return 0;
    case ObsLabel::A0: return 1;
    case ObsLabel::Z: return 2;
    case ObsLabel::A1: return 7;
  }
  return 0;
}

inline BasisInstruction angle_index_to_instruction(int k) {
  k = ((k % 8) + 8) % 8;
  switch (k) {
    case 0: return {ObsLabel::X, +1};
    case 1: return {ObsLabel::A0, +1};
    case 2: return {ObsLabel::Z, +1};
    case 3: return {ObsLabel::A1, -1};
    case 4: return {ObsLabel::X, -1};
    case 5: return {ObsLabel::A0, -1};
    case 6: return {ObsLabel::Z, -1};
    case 7: return {ObsLabel::A1, +1};
  }
  return {ObsLabel::X, +1};
}

/// Basis the Verifier instructs so that measuring it on the corrected
/// state W|psi>, W = X^b Z^a U(T), reproduces the logical label on |psi>:
/// the instructed observable is W O W^dagger.
inline BasisInstruction compensate_basis(ObsLabel logical, int t, int pauli_a = 0,
                                         int pauli_b = 0) {
  int k = obs_label_angle_index(logical);
  k -= t;                       // conjugation by U(T)
  if (pauli_a) k = 4 - k;       // conjugation by Z
  if (pauli_b) k = -k;          // conjugation by X
  return angle_index_to_instruction(k);
}

// ---------------------------------------------------------------------------
// Parties and messages
// ---------------------------------------------------------------------------

struct PartyMessage {
  int index = 0;
  std::string sender;
  std::string receiver;
  std::string kind;  // state-transfer | instruction | outcome | twirl-vector | bell-outcomes
  nlohmann::ordered_json payload;
};

/// Prover 1 prepares initial states and applies the instructed twirl. A
/// dishonest implementation may deviate arbitrarily within these powers.
struct Prover1Strategy {
  virtual ~Prover1Strategy() = default;
  virtual PureState prepare(const ColoredGraph& g, RngStream& rng) = 0;
  virtual PureState apply_twirl(const PureState& st, const std::vector<int>& t,
                                RngStream& rng) = 0;
};

/// Prover 2 owns the measurement devices. It never receives the twirl
/// vector; the interface carries only the compensated basis label.
struct Prover2Strategy {
  virtual ~Prover2Strategy() = default;
  virtual Matrix observable(int site, ObsLabel label, RngStream& rng) = 0;
};

struct HonestProver1 : Prover1Strategy {
  PureState prepare(const ColoredGraph& g, RngStream&) override { return make_graph_state(g); }
  PureState apply_twirl(const PureState& st, const std::vector<int>& t, RngStream&) override {
    PureState out = st;
    for (std::size_t i = 0; i < t.size(); ++i)
      out = apply_local(out, static_cast<int>(i), twirl_unitary(t[i]));
    return out;
  }
};

/// Sends an uncorrelated |+>^n product state instead of the graph state.
struct ProductStateProver1 : Prover1Strategy {
  PureState prepare(const ColoredGraph& g, RngStream&) override {
    ColoredGraph empty = make_colored_graph(g.n, {}, g.coloring);
    return make_graph_state(empty);
  }
  PureState apply_twirl(const PureState& st, const std::vector<int>& t, RngStream&) override {
    PureState out = st;
    for (std::size_t i = 0; i < t.size(); ++i)
      out = apply_local(out, static_cast<int>(i), twirl_unitary(t[i]));
    return out;
  }
};

struct HonestProver2 : Prover2Strategy {
  Matrix observable(int, ObsLabel label, RngStream&) override {
    switch (label) {
      case ObsLabel::X: return pauli_x();
      case ObsLabel::Z: return pauli_z();
      case ObsLabel::A0: return a_observable(0);
      case ObsLabel::A1: return a_observable(1);
    }
    return pauli_x();
  }
};

/// Measurement devices rotated by a fixed angle.
struct RotatedProver2 : Prover2Strategy {
  double theta;
  explicit RotatedProver2(double th) : theta(th) {}
  Matrix observable(int site, ObsLabel label, RngStream& rng) override {
    HonestProver2 honest;
    return rotated(honest.observable(site, label, rng), theta);
  }
};

enum class Scenario { trusting, teleport };

struct DelegationResult {
  std::vector<PartyMessage> transcript;
  Test4Report report;
};

namespace detail {

/// Teleports one site through a fresh Bell pair: returns the outcome bits
/// (a, b) and replaces the site's content with the received qubit.
/// Circuit: CNOT(site -> anc1), H(site), Z-measure site (bit a) and anc1
/// (bit b); the receiver holds X^b Z^a |psi_site>.
inline std::pair<int, int> teleport_site(PureState& st, int site, RngStream& rng) {
  const int n = st.num_sites();
  // Append the Bell pair (anc1 = n, anc2 = n+1).
  PureState ext;
  ext.dims = st.dims;
  ext.dims.push_back(2);
  ext.dims.push_back(2);
  ext.amps = Vector::Zero(st.amps.size() * 4);
  for (Eigen::Index i = 0; i < st.amps.size(); ++i) {
    ext.amps(i * 4 + 0) = st.amps(i) / std::sqrt(2.0);  // |00>
    ext.amps(i * 4 + 3) = st.amps(i) / std::sqrt(2.0);  // |11>
  }
  // CNOT site -> anc1.
  Matrix cnot = Matrix::Zero(4, 4);
  cnot(0, 0) = cnot(1, 1) = 1.0;  // |0>: identity on target
  cnot(3, 2) = cnot(2, 3) = 1.0;  // |1>: flip target
  ext.amps = apply_two_site_matrix(ext, site, n, cnot);
  ext.amps = apply_site_matrix(ext, site, hadamard());
  BinaryObservable zsite{site, pauli_z()};
  BinaryObservable zanc{n, pauli_z()};
  auto [o1, st1] = measure(ext, zsite, rng);
  auto [o2, st2] = measure(st1, zanc, rng);
  const int a = o1 == +1 ? 0 : 1;
  const int b = o2 == +1 ? 0 : 1;

  // The measured qubits are frozen in basis states; rebuild the compact
  // n-site state with the received qubit (anc2) in the original slot.
  PureState out;
  out.dims = st.dims;
  out.amps = Vector::Zero(st.amps.size());
  std::vector<Eigen::Index> stride(ext.dims.size());
  Eigen::Index s = 1;
  for (int j = static_cast<int>(ext.dims.size()) - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= ext.dims[static_cast<std::size_t>(j)];
  }
  for (Eigen::Index idx = 0; idx < st2.amps.size(); ++idx) {
    if (std::norm(st2.amps(idx)) == 0.0) continue;
    const Eigen::Index anc2_bit = idx % 2;
    Eigen::Index compact = 0;
    for (int j = 0; j < n; ++j) {
      Eigen::Index digit = (idx / stride[static_cast<std::size_t>(j)]) %
                           ext.dims[static_cast<std::size_t>(j)];
      if (j == site) digit = anc2_bit;
      compact = compact * out.dims[static_cast<std::size_t>(j)] + digit;
    }
    out.amps(compact) += st2.amps(idx);
  }
  out.amps /= out.amps.norm();
  st = out;
  return {a, b};
}

}  // namespace detail

/// Fixed-order measurement schedule for an adaptive plan: stage i
/// instructs site order[i]; across every outcome history only the basis
/// may differ, never the order.
struct StageInstruction {
  int stage = 0;
  int site = 0;
  std::vector<PlanChoice> bases_across_histories;
};

inline std::vector<StageInstruction> measurement_stage_schedule(const ColoredGraph& g,
                                                                const AdaptivePlan& plan) {
  plan.check_valid(g.n);
  std::vector<StageInstruction> out;
  for (int step = 0; step < g.n; ++step) {
    StageInstruction st;
    st.stage = step;
    st.site = plan.order[static_cast<std::size_t>(step)];
    const std::uint64_t histories = 1ULL << step;
    for (std::uint64_t h = 0; h < histories; ++h) {
      std::vector<int> outcomes;
      for (int l = 0; l < step; ++l) outcomes.push_back(((h >> (step - 1 - l)) & 1) ? -1 : +1);
      const PlanChoice c = plan.choose(step, outcomes);
      if (std::find(st.bases_across_histories.begin(), st.bases_across_histories.end(), c) ==
          st.bases_across_histories.end())
        st.bases_across_histories.push_back(c);
    }
    out.push_back(std::move(st));
  }
  return out;
}

/// Runs Test (4) with preparation delegated to Prover 1 and measurement
/// to Prover 2. Trusting scenario: Prover 1 twirls each site by U(T)
/// before transfer and the Verifier compensates the instructed bases.
/// Teleport scenario: every site is teleported through a shared Bell
/// pair; the Verifier folds the reported by-product bits into the
/// compensation. Prover 2 never receives the twirl vector.
inline DelegationResult run_delegation(const ColoredGraph& g, std::int64_t m, double c1,
                                       Scenario scenario, Prover1Strategy& p1,
                                       Prover2Strategy& p2, std::uint64_t seed) {
  {
    const auto violations = validate(g);
    if (!violations.empty())
      throw std::invalid_argument("run_delegation: graph invalid: " + violations.front().message);
  }
  auto result = std::make_shared<DelegationResult>();
  auto log = [result](const std::string& from, const std::string& to, const std::string& kind,
                      nlohmann::ordered_json payload) {
    PartyMessage msg;
    msg.index = static_cast<int>(result->transcript.size());
    msg.sender = from;
    msg.receiver = to;
    msg.kind = kind;
    msg.payload = std::move(payload);
    result->transcript.push_back(std::move(msg));
  };

  RngStream root(seed);
  const int n = g.n;

  CopySource source = [&, root](std::uint64_t copy_id) {
    RngStream verifier_rng = root.child(3, copy_id);
    RngStream p1_rng = root.child(4, copy_id);
    RngStream p2_rng_seed = root.child(5, copy_id);

    // Verifier draws the twirl vector and instructs Prover 1.
    TwirlVector twirl;
    twirl.t.resize(static_cast<std::size_t>(n));
    for (auto& v : twirl.t) v = static_cast<int>(verifier_rng.next_below(8));
    twirl.check_valid();
    const std::vector<int>& t = twirl.t;
    log("verifier", "prover1", "twirl-vector",
        {{"copy", copy_id}, {"t", t}});
    log("verifier", "prover1", "instruction",
        {{"copy", copy_id}, {"action", "prepare"}});

    PureState st = p1.prepare(g, p1_rng);
    st = p1.apply_twirl(st, t, p1_rng);

    std::vector<int> pauli_a(static_cast<std::size_t>(n), 0);
    std::vector<int> pauli_b(static_cast<std::size_t>(n), 0);
    if (scenario == Scenario::teleport) {
      // The by-product bits (a, b) per site are reported back; the
      // packed code 2a + b plays the role of the extra correction data.
      twirl.t_prime = std::vector<int>(static_cast<std::size_t>(n), 0);
      for (int site = 0; site < n; ++site) {
        auto [a, b] = detail::teleport_site(st, site, p1_rng);
        pauli_a[static_cast<std::size_t>(site)] = a;
        pauli_b[static_cast<std::size_t>(site)] = b;
        (*twirl.t_prime)[static_cast<std::size_t>(site)] = 2 * a + b;
      }
      twirl.check_valid();
      log("prover1", "verifier", "bell-outcomes",
          {{"copy", copy_id}, {"t_prime", *twirl.t_prime}});
    }
    log("prover1", "prover2", "state-transfer",
        {{"copy", copy_id}, {"sites", n}});

    PreparedCopy copy;
    copy.state = std::move(st);
    copy.rng = p2_rng_seed;
    auto p2ptr = &p2;
    copy.realize = [t, pauli_a, pauli_b, p2ptr, log, copy_id](int site, ObsLabel logical,
                                                              RngStream& rng) {
      const BasisInstruction instr =
          compensate_basis(logical, t[static_cast<std::size_t>(site)],
                           pauli_a[static_cast<std::size_t>(site)],
                           pauli_b[static_cast<std::size_t>(site)]);
      log("verifier", "prover2", "instruction",
          {{"copy", copy_id}, {"site", site}, {"basis", obs_label_name(instr.label)}});
      Matrix m = p2ptr->observable(site, instr.label, rng);
      return std::pair<Matrix, int>(std::move(m), instr.sign);
    };
    copy.on_measure = [log, copy_id](int site, ObsLabel, int outcome) {
      log("prover2", "verifier", "outcome",
          {{"copy", copy_id}, {"site", site}, {"value", outcome}});
    };
    return copy;
  };

  result->report = run_test4_with_source(source, g, m, c1, seed);
  DelegationResult out = std::move(*result);
  return out;
}

/// Structural channel discipline over a transcript: state transfers flow
/// only from Prover 1, instructions only from the Verifier, and in the
/// trusting scenario no twirl-vector message reaches Prover 2.
inline std::vector<std::string> transcript_violations(const std::vector<PartyMessage>& transcript) {
  std::vector<std::string> out;
  for (const auto& msg : transcript) {
    if (msg.kind == "state-transfer" && msg.sender != "prover1")
      out.push_back("state-transfer from " + msg.sender);
    if (msg.kind == "instruction" && msg.sender != "verifier")
      out.push_back("instruction from " + msg.sender);
    if (msg.kind == "twirl-vector" && msg.receiver == "prover2")
      out.push_back("twirl vector sent to prover2");
  }
  return out;
}

inline std::string transcript_to_jsonl(const std::vector<PartyMessage>& transcript) {
  std::string out;
  for (const auto& msg : transcript) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["i"] = msg.index;
    j["from"] = msg.sender;
    j["to"] = msg.receiver;
    j["kind"] = msg.kind;
    j["payload"] = msg.payload;
    out += j.dump() + "\n";
  }
  return out;
}

/// Exact distribution-level twirl check: for each site and label, the
/// compensated probability of outcome +1 on the twirled state must match
/// the untwirled probability. Returns the largest absolute difference.
inline double twirl_compensation_max_error(const ColoredGraph& g, const std::vector<int>& t) {
  const PureState base = make_graph_state(g);
  PureState twirled = base;
  for (int site = 0; site < g.n; ++site)
    twirled = apply_local(twirled, site, twirl_unitary(t[static_cast<std::size_t>(site)]));
  HonestProver2 honest;
  RngStream dummy(0);
  double worst = 0.0;
  for (int site = 0; site < g.n; ++site) {
    for (ObsLabel l : {ObsLabel::X, ObsLabel::Z, ObsLabel::A0, ObsLabel::A1}) {
      const BinaryObservable direct{site, honest.observable(site, l, dummy)};
      const double p_direct = prob_plus(base, direct);
      const BasisInstruction instr = compensate_basis(l, t[static_cast<std::size_t>(site)]);
      const BinaryObservable comp{site, honest.observable(site, instr.label, dummy)};
      double p_comp = prob_plus(twirled, comp);
      if (instr.sign < 0) p_comp = 1.0 - p_comp;
      worst = std::max(worst, std::abs(p_direct - p_comp));
    }
  }
  return worst;
}

}  // namespace mbqc

#endif  // MBQC_DELEGATION_HPP
