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

#ifndef MBQC_DEVICE_HPP
#define MBQC_DEVICE_HPP

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mbqc/graphs.hpp"
#include "mbqc/hilbert.hpp"
#include "mbqc/linalg.hpp"
#include "mbqc/rng.hpp"

namespace mbqc {

enum class ObsLabel : int { X = 0, Z = 1, A0 = 2, A1 = 3 };

inline const char* obs_label_name(ObsLabel l) {
  switch (l) {
    case ObsLabel::X: return "X";
    case ObsLabel::Z: return "Z";
    case ObsLabel::A0: return "A0";
    case ObsLabel::A1: return "A1";
  }
  return "?";
}

/// An untrusted preparation plus per-site untrusted observables; the
/// object under test. The A(i)' entries are independent devices, not
/// derived from X' and Z'. Optional hooks perturb the state per copy or
/// an observable per measurement.
struct DeviceModel {
  std::vector<Eigen::Index> dims;
  PureState state;
  std::vector<std::array<Matrix, 4>> observables;  // [site][label]

  std::function<PureState(const PureState&, RngStream&)> state_hook;
  std::function<Matrix(const Matrix&, int site, ObsLabel, RngStream&)> obs_hook;

  int num_sites() const { return static_cast<int>(dims.size()); }

  const Matrix& base_observable(int site, ObsLabel l) const {
    return observables[static_cast<std::size_t>(site)][static_cast<std::size_t>(l)];
  }

  PureState make_copy(RngStream& rng) const {
    if (state_hook) return state_hook(state, rng);
    return state;
  }

  BinaryObservable observable(int site, ObsLabel l, RngStream& rng) const {
    BinaryObservable obs;
    obs.site = site;
    obs.matrix = base_observable(site, l);
    if (obs_hook) obs.matrix = obs_hook(obs.matrix, site, l, rng);
    return obs;
  }

  void check_valid() const {
    state.check_valid();
    if (state.dims != dims) throw std::invalid_argument("DeviceModel: dims mismatch");
    if (observables.size() != dims.size())
      throw std::invalid_argument("DeviceModel: observable table size mismatch");
    for (std::size_t s = 0; s < dims.size(); ++s)
      for (const auto& m : observables[s]) {
        if (m.rows() != dims[s] || m.cols() != dims[s])
          throw std::invalid_argument("DeviceModel: observable dimension mismatch");
        if (!is_hermitian(m, 1e-12))
          throw std::invalid_argument("DeviceModel: observable not Hermitian");
        if (!squares_to_identity(m, 1e-10))
          throw std::invalid_argument("DeviceModel: observable spectrum not +/-1");
      }
  }
};

namespace devices {

inline std::array<Matrix, 4> qubit_observables() {
  return {pauli_x(), pauli_z(), a_observable(0), a_observable(1)};
}

/// Trusted Bell pair (|0,+> + |1,->)/sqrt(2) with exact qubit observables.
inline DeviceModel honest_bell() {
  DeviceModel d;
  d.dims = {2, 2};
  ColoredGraph g = make_colored_graph(2, {{0, 1}}, {0, 1});
  d.state = make_graph_state(g);
  d.observables = {qubit_observables(), qubit_observables()};
  return d;
}

/// Honest n-qubit graph-state device.
inline DeviceModel honest_graph(const ColoredGraph& g) {
  DeviceModel d;
  d.dims.assign(static_cast<std::size_t>(g.n), 2);
  d.state = make_graph_state(g);
  d.observables.assign(static_cast<std::size_t>(g.n), qubit_observables());
  return d;
}

/// Product state |0>|0> with honest observables; fails the deterministic
/// Bell correlations.
inline DeviceModel product_state_bell() {
  DeviceModel d;
  d.dims = {2, 2};
  d.state.dims = {2, 2};
  d.state.amps = Vector::Zero(4);
  d.state.amps(0) = 1.0;
  d.observables = {qubit_observables(), qubit_observables()};
  return d;
}

/// All four observables on one site conjugated by rotation(theta/2).
inline DeviceModel rotated_observables_bell(int site, double theta) {
  DeviceModel d = honest_bell();
  for (auto& m : d.observables[static_cast<std::size_t>(site)]) m = rotated(m, theta);
  return d;
}

/// Only one observable rotated (used to probe single inequalities).
inline DeviceModel rotated_single_observable_bell(int site, ObsLabel l, double theta) {
  DeviceModel d = honest_bell();
  auto& m = d.observables[static_cast<std::size_t>(site)][static_cast<std::size_t>(l)];
  m = rotated(m, theta);
  return d;
}

/// Bell state rotated on site 0 by theta (observables exact).
inline DeviceModel rotated_state_bell(double theta) {
  DeviceModel d = honest_bell();
  d.state = apply_local(d.state, 0, rotation(theta / 2.0));
  return d;
}

/// Purification of (1-p)|Phi><Phi| + p I/4 with the 4-dim environment
/// folded into untrusted site 2 (dims 2 x 8). Expectations match the
/// mixed state exactly.
inline DeviceModel depolarized_bell(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarized_bell: p out of [0,1]");
  DeviceModel honest = honest_bell();
  Matrix rho = honest.state.amps * honest.state.amps.adjoint();
  rho = (1.0 - p) * rho + (p / 4.0) * Matrix::Identity(4, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  DeviceModel d;
  d.dims = {2, 8};
  d.state.dims = {2, 8};
  d.state.amps = Vector::Zero(16);
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double lam = std::max(0.0, es.eigenvalues()(k));
    const double w = std::sqrt(lam);
    for (Eigen::Index i1 = 0; i1 < 2; ++i1)
      for (Eigen::Index i2 = 0; i2 < 2; ++i2)
        d.state.amps(i1 * 8 + i2 * 4 + k) = w * es.eigenvectors()(i1 * 2 + i2, k);
  }
  d.state.amps /= d.state.amps.norm();
  const Matrix id4 = Matrix::Identity(4, 4);
  d.observables.resize(2);
  d.observables[0] = qubit_observables();
  const auto base = qubit_observables();
  for (std::size_t l = 0; l < 4; ++l) d.observables[1][l] = kron(base[l], id4);
  return d;
}

/// Maximally mixed two-qubit preparation, purified with a 4-dim
/// environment on site 2 (dims 2 x 8).
inline DeviceModel maximally_mixed_bell() { return depolarized_bell(1.0); }

/// Untrusted site 1 of dimension 3: qubit block plus one extra level with
/// fixed signs; a leak amplitude moves weight into the extra level.
inline DeviceModel dim3_bell(double leak) {
  DeviceModel honest = honest_bell();
  DeviceModel d;
  d.dims = {3, 2};
  d.state.dims = {3, 2};
  d.state.amps = Vector::Zero(6);
  for (Eigen::Index i1 = 0; i1 < 2; ++i1)
    for (Eigen::Index i2 = 0; i2 < 2; ++i2)
      d.state.amps(i1 * 2 + i2) = honest.state.amps(i1 * 2 + i2);
  d.state.amps(2 * 2 + 0) = leak;  // |2>|0> component
  d.state.amps /= d.state.amps.norm();
  auto embed = [](const Matrix& q, double extra) {
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = q;
    m(2, 2) = extra;
    return m;
  };
  d.observables.resize(2);
  d.observables[0] = {embed(pauli_x(), 1.0), embed(pauli_z(), -1.0),
                      embed(a_observable(0), 1.0), embed(a_observable(1), -1.0)};
  d.observables[1] = qubit_observables();
  return d;
}

/// Graph device whose preparation is missing one edge.
inline DeviceModel missing_edge_graph(const ColoredGraph& g, std::pair<int, int> edge) {
  ColoredGraph broken = g;
  const auto e = std::minmax(edge.first, edge.second);
  auto it = std::find(broken.edges.begin(), broken.edges.end(),
                      std::pair<int, int>{e.first, e.second});
  if (it == broken.edges.end()) throw std::invalid_argument("missing_edge_graph: no such edge");
  broken.edges.erase(it);
  DeviceModel d = honest_graph(g);
  d.state = make_graph_state(broken);
  return d;
}

/// Graph device with a Z flip applied to one site of the preparation.
inline DeviceModel z_flip_graph(const ColoredGraph& g, int site) {
  DeviceModel d = honest_graph(g);
  d.state = apply_local(d.state, site, pauli_z());
  return d;
}

/// Graph device with all observables on one site rotated.
inline DeviceModel rotated_observables_graph(const ColoredGraph& g, int site, double theta) {
  DeviceModel d = honest_graph(g);
  for (auto& m : d.observables[static_cast<std::size_t>(site)]) m = rotated(m, theta);
  return d;
}

/// Battery of perturbed two-site devices used by the extraction and
/// certification sweeps: local rotations, depolarization up to 5%, and a
/// dimension-3 untrusted site.
inline std::vector<DeviceModel> bell_battery() {
  std::vector<DeviceModel> out;
  for (double theta : {0.01, 0.02, 0.05, 0.08, 0.12, 0.2, 0.3}) {
    out.push_back(rotated_observables_bell(0, theta));
    out.push_back(rotated_observables_bell(1, theta));
    out.push_back(rotated_single_observable_bell(0, ObsLabel::X, theta));
    out.push_back(rotated_single_observable_bell(0, ObsLabel::A0, theta));
    out.push_back(rotated_single_observable_bell(1, ObsLabel::Z, theta));
    out.push_back(rotated_state_bell(theta));
  }
  for (double p : {0.002, 0.01, 0.03, 0.05}) out.push_back(depolarized_bell(p));
  for (double leak : {0.02, 0.05, 0.1, 0.2}) out.push_back(dim3_bell(leak));
  return out;
}

}  // namespace devices

}  // namespace mbqc

#endif  // MBQC_DEVICE_HPP
