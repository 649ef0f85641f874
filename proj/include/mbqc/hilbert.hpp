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

#ifndef MBQC_HILBERT_HPP
#define MBQC_HILBERT_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbqc/graphs.hpp"
#include "mbqc/linalg.hpp"
#include "mbqc/rng.hpp"

namespace mbqc {

/// Amplitude vector over a composite system with per-site dimensions.
///
/// Site 0 is the most significant index: for dims (d0, ..., d_{n-1}) the
/// amplitude of basis state (i0, ..., i_{n-1}) sits at
/// ((i0*d1 + i1)*d2 + ...) + i_{n-1}. Values are immutable from the
/// caller's perspective; every operation returns a fresh state.
struct PureState {
  std::vector<Eigen::Index> dims;
  Vector amps;

  Eigen::Index total_dim() const {
    Eigen::Index d = 1;
    for (auto x : dims) d *= x;
    return d;
  }

  int num_sites() const { return static_cast<int>(dims.size()); }

  double norm() const { return amps.norm(); }

  void check_valid() const {
    if (dims.empty()) throw std::invalid_argument("PureState: empty dims");
    for (auto d : dims)
      if (d < 1) throw std::invalid_argument("PureState: dimension < 1");
    if (amps.size() != total_dim())
      throw std::invalid_argument("PureState: amplitude length != product of dims");
    if (std::abs(amps.squaredNorm() - 1.0) > 1e-12)
      throw std::invalid_argument("PureState: not normalized");
  }
};

/// Hermitian matrix with +/-1 spectrum attached to a site.
struct BinaryObservable {
  int site = 0;
  Matrix matrix;

  void check_valid(const PureState& state) const {
    if (site < 0 || site >= state.num_sites())
      throw std::invalid_argument("BinaryObservable: site out of range");
    if (matrix.rows() != state.dims[static_cast<std::size_t>(site)])
      throw std::invalid_argument("BinaryObservable: dimension mismatch");
    if (!is_hermitian(matrix, 1e-12))
      throw std::invalid_argument("BinaryObservable: matrix not Hermitian");
    if (!squares_to_identity(matrix, 1e-10))
      throw std::invalid_argument("BinaryObservable: spectrum not in {+1,-1}");
  }
};

/// Carrier for a single measurement event.
struct MeasurementRecord {
  int site = 0;
  std::string setting;
  int outcome = 0;  // +1 or -1
};

namespace detail {

/// Applies a d x d matrix to one site of the amplitude vector.
inline Vector apply_site_matrix(const PureState& state, int site, const Matrix& m) {
  const auto& dims = state.dims;
  const Eigen::Index d = dims[static_cast<std::size_t>(site)];
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("apply_site_matrix: dimension mismatch");
  Eigen::Index inner = 1;
  for (std::size_t j = static_cast<std::size_t>(site) + 1; j < dims.size(); ++j)
    inner *= dims[j];
  const Eigen::Index outer = state.total_dim() / (d * inner);

  Vector out(state.amps.size());
  Vector buf(d);
  for (Eigen::Index a = 0; a < outer; ++a) {
    const Eigen::Index base_a = a * d * inner;
    for (Eigen::Index c = 0; c < inner; ++c) {
      for (Eigen::Index b = 0; b < d; ++b) buf(b) = state.amps(base_a + b * inner + c);
      for (Eigen::Index b = 0; b < d; ++b) {
        Complex acc(0, 0);
        for (Eigen::Index k = 0; k < d; ++k) acc += m(b, k) * buf(k);
        out(base_a + b * inner + c) = acc;
      }
    }
  }
  return out;
}

/// Applies a (da*db) x (da*db) matrix on two distinct sites (kron order a then b).
inline Vector apply_two_site_matrix(const PureState& state, int site_a, int site_b,
                                    const Matrix& m) {
  if (site_a == site_b) throw std::invalid_argument("apply_two_site_matrix: sites equal");
  const auto& dims = state.dims;
  const Eigen::Index da = dims[static_cast<std::size_t>(site_a)];
  const Eigen::Index db = dims[static_cast<std::size_t>(site_b)];
  if (m.rows() != da * db || m.cols() != da * db)
    throw std::invalid_argument("apply_two_site_matrix: dimension mismatch");

  const Eigen::Index total = state.total_dim();
  std::vector<Eigen::Index> stride(dims.size());
  Eigen::Index s = 1;
  for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= dims[static_cast<std::size_t>(j)];
  }
  const Eigen::Index sa = stride[static_cast<std::size_t>(site_a)];
  const Eigen::Index sb = stride[static_cast<std::size_t>(site_b)];

  Vector out = Vector::Zero(total);
  std::vector<bool> seen(static_cast<std::size_t>(total), false);
  Vector buf(da * db);
  for (Eigen::Index base = 0; base < total; ++base) {
    if (seen[static_cast<std::size_t>(base)]) continue;
    const Eigen::Index ia = (base / sa) % da;
    const Eigen::Index ib = (base / sb) % db;
    if (ia != 0 || ib != 0) continue;
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index b = 0; b < db; ++b) {
        const Eigen::Index idx = base + a * sa + b * sb;
        seen[static_cast<std::size_t>(idx)] = true;
        buf(a * db + b) = state.amps(idx);
      }
    for (Eigen::Index a = 0; a < da; ++a)
      for (Eigen::Index b = 0; b < db; ++b) {
        Complex acc(0, 0);
        for (Eigen::Index k = 0; k < da * db; ++k) acc += m(a * db + b, k) * buf(k);
        out(base + a * sa + b * sb) = acc;
      }
  }
  return out;
}

}  // namespace detail

/// |+>^n followed by CZ on every edge; stabilized by X_i prod_{j in N_i} Z_j.
inline PureState make_graph_state(const ColoredGraph& graph) {
  if (graph.n < 1) throw std::invalid_argument("make_graph_state: need n >= 1");
  for (const auto& e : graph.edges)
    if (e.first == e.second)
      throw std::invalid_argument("make_graph_state: self-loop");
  for (std::size_t i = 0; i < graph.edges.size(); ++i)
    for (std::size_t j = i + 1; j < graph.edges.size(); ++j)
      if (graph.edges[i] == graph.edges[j])
        throw std::invalid_argument("make_graph_state: duplicate edge");

  const int n = graph.n;
  const Eigen::Index total = Eigen::Index(1) << n;
  PureState st;
  st.dims.assign(static_cast<std::size_t>(n), 2);
  st.amps = Vector::Constant(total, Complex(std::pow(2.0, -0.5 * n), 0.0));
  for (const auto& e : graph.edges) {
    const Eigen::Index bit_u = Eigen::Index(1) << (n - 1 - e.first);
    const Eigen::Index bit_v = Eigen::Index(1) << (n - 1 - e.second);
    for (Eigen::Index idx = 0; idx < total; ++idx)
      if ((idx & bit_u) && (idx & bit_v)) st.amps(idx) = -st.amps(idx);
  }
  return st;
}

/// Born probability of outcome +1 for a binary observable.
inline double prob_plus(const PureState& state, const BinaryObservable& obs) {
  const Eigen::Index d = state.dims[static_cast<std::size_t>(obs.site)];
  const Matrix proj = 0.5 * (Matrix::Identity(d, d) + obs.matrix);
  return detail::apply_site_matrix(state, obs.site, proj).squaredNorm();
}

/// Projective measurement with the +/-1 spectral projectors of obs.
/// Outcome +1 is chosen when the uniform draw is < P(+1).
inline std::pair<int, PureState> measure(const PureState& state, const BinaryObservable& obs,
                                         RngStream& rng) {
  obs.check_valid(state);
  const Eigen::Index d = state.dims[static_cast<std::size_t>(obs.site)];
  const Matrix id = Matrix::Identity(d, d);
  Vector plus = detail::apply_site_matrix(state, obs.site, 0.5 * (id + obs.matrix));
  const double p_plus = plus.squaredNorm();
  const int outcome = rng.next_double() < p_plus ? +1 : -1;
  PureState post;
  post.dims = state.dims;
  if (outcome == +1) {
    const double nrm = std::sqrt(p_plus);
    if (nrm < 1e-14) throw std::runtime_error("measure: degenerate +1 branch");
    post.amps = plus / nrm;
  } else {
    Vector minus = state.amps - plus;
    const double nrm = minus.norm();
    if (nrm < 1e-14) throw std::runtime_error("measure: degenerate -1 branch");
    post.amps = minus / nrm;
  }
  return {outcome, post};
}

/// Exact <psi| O_1 ... O_k |psi> for observables on distinct sites.
inline double expectation(const PureState& state, const std::vector<BinaryObservable>& obs_list) {
  for (std::size_t i = 0; i < obs_list.size(); ++i)
    for (std::size_t j = i + 1; j < obs_list.size(); ++j)
      if (obs_list[i].site == obs_list[j].site)
        throw std::invalid_argument("expectation: sites must be distinct");
  Vector v = state.amps;
  PureState tmp{state.dims, v};
  for (const auto& obs : obs_list) {
    tmp.amps = detail::apply_site_matrix(tmp, obs.site, obs.matrix);
  }
  const Complex val = state.amps.dot(tmp.amps);
  return val.real();
}

/// Applies a unitary on one site; rejects non-unitary input.
inline PureState apply_local(const PureState& state, int site, const Matrix& u) {
  if (site < 0 || site >= state.num_sites())
    throw std::invalid_argument("apply_local: site out of range");
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("apply_local: matrix not unitary");
  PureState out;
  out.dims = state.dims;
  out.amps = detail::apply_site_matrix(state, site, u);
  return out;
}

/// P(product of two single-site outcomes = +1) = (1 + <O1 O2>)/2.
inline double product_plus_probability(const PureState& state, const BinaryObservable& o1,
                                       const BinaryObservable& o2) {
  return 0.5 * (1.0 + expectation(state, {o1, o2}));
}

/// Reduced density matrix of the listed sites (ascending order given).
inline Matrix reduced_density(const PureState& state, const std::vector<int>& keep) {
  const auto& dims = state.dims;
  std::vector<Eigen::Index> stride(dims.size());
  Eigen::Index s = 1;
  for (int j = static_cast<int>(dims.size()) - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= dims[static_cast<std::size_t>(j)];
  }
  Eigen::Index dk = 1;
  for (int k : keep) dk *= dims[static_cast<std::size_t>(k)];

  // Enumerate kept-index combinations; inner sum over the rest.
  const Eigen::Index total = state.total_dim();
  const Eigen::Index denv = total / dk;
  std::vector<Eigen::Index> kept_strides;
  kept_strides.reserve(keep.size());
  for (int k : keep) kept_strides.push_back(stride[static_cast<std::size_t>(k)]);

  // Map: for each global index, its kept-part row and env-part id.
  std::vector<Eigen::Index> row_of(static_cast<std::size_t>(total));
  std::vector<Eigen::Index> env_of(static_cast<std::size_t>(total));
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index row = 0;
    for (std::size_t t = 0; t < keep.size(); ++t) {
      const auto site = static_cast<std::size_t>(keep[t]);
      row = row * dims[site] + (idx / stride[site]) % dims[site];
    }
    Eigen::Index env = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      bool kept = false;
      for (int k : keep)
        if (static_cast<std::size_t>(k) == j) kept = true;
      if (!kept) env = env * dims[j] + (idx / stride[j]) % dims[j];
    }
    row_of[static_cast<std::size_t>(idx)] = row;
    env_of[static_cast<std::size_t>(idx)] = env;
  }

  Matrix amp(dk, denv);
  for (Eigen::Index idx = 0; idx < total; ++idx)
    amp(row_of[static_cast<std::size_t>(idx)], env_of[static_cast<std::size_t>(idx)]) =
        state.amps(idx);
  return amp * amp.adjoint();
}

}  // namespace mbqc

#endif  // MBQC_HILBERT_HPP
