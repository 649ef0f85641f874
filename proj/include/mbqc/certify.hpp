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

#ifndef MBQC_CERTIFY_HPP
#define MBQC_CERTIFY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mbqc/device.hpp"
#include "mbqc/extraction.hpp"
#include "mbqc/graphs.hpp"
#include "mbqc/hilbert.hpp"
#include "mbqc/linalg.hpp"

namespace mbqc {

/// Basis choice per adaptive step; Id means no measurement at that step.
enum class PlanChoice : int { X = 0, Z = 1, A0 = 2, A1 = 3, Id = 4 };

/// Fixed measurement order with outcome-dependent basis choices. The
/// order never depends on outcomes; only the basis does.
struct AdaptivePlan {
  std::vector<int> order;  // permutation of sites
  std::function<PlanChoice(int step, const std::vector<int>& prior_outcomes)> choose;

  void check_valid(int n) const {
    if (static_cast<int>(order.size()) != n)
      throw std::invalid_argument("AdaptivePlan: order length != site count");
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (int s : order) {
      if (s < 0 || s >= n || seen[static_cast<std::size_t>(s)])
        throw std::invalid_argument("AdaptivePlan: order is not a permutation");
      seen[static_cast<std::size_t>(s)] = true;
    }
    if (!choose) throw std::invalid_argument("AdaptivePlan: missing choice function");
  }
};

namespace detail {

/// op at one site, identity elsewhere.
inline Matrix embed_site_operator(const Matrix& op, int site,
                                  const std::vector<Eigen::Index>& dims) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t j = 0; j < dims.size(); ++j) {
    if (static_cast<int>(j) == site)
      out = kron(out, op);
    else
      out = kron(out, Matrix::Identity(dims[j], dims[j]));
  }
  return out;
}

inline std::vector<int> history_outcomes(std::uint64_t k, int upto, int n) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(upto));
  for (int l = 0; l < upto; ++l)
    out.push_back(((k >> (n - 1 - l)) & 1) ? -1 : +1);
  return out;
}

inline Matrix plan_observable(const DeviceModel& device, int site, PlanChoice c) {
  if (c == PlanChoice::Id)
    return Matrix::Identity(device.dims[static_cast<std::size_t>(site)],
                            device.dims[static_cast<std::size_t>(site)]);
  return device.base_observable(site, static_cast<ObsLabel>(static_cast<int>(c)));
}

inline Matrix ideal_observable(PlanChoice c) {
  switch (c) {
    case PlanChoice::X: return pauli_x();
    case PlanChoice::Z: return pauli_z();
    case PlanChoice::A0: return a_observable(0);
    case PlanChoice::A1: return a_observable(1);
    case PlanChoice::Id: return Matrix::Identity(2, 2);
  }
  return Matrix::Identity(2, 2);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The Lambda channel
// ---------------------------------------------------------------------------

/// W_n built from per-step Hadamards on trusted control qubits and
/// controlled device observables; the trusted-register computational
/// readout of W_n (rho (x) |+><+|^n) W_n^dagger reproduces the adaptive
/// measurement's outcome distribution (bit 0 <-> outcome +1).
struct LambdaChannel {
  std::vector<Eigen::Index> joint_dims;  // [untrusted sites..., trusted qubits...]
  int n = 0;
  std::function<PureState(const PureState&)> apply_w;

  /// Outcome distribution over the 2^n trusted basis states.
  Eigen::VectorXd output_distribution(const PureState& untrusted_input) const {
    PureState joint;
    joint.dims = joint_dims;
    const Eigen::Index reg = Eigen::Index(1) << n;
    joint.amps = Vector::Zero(untrusted_input.amps.size() * reg);
    Vector plus_reg = Vector::Constant(reg, Complex(std::pow(2.0, -0.5 * n), 0.0));
    for (Eigen::Index u = 0; u < untrusted_input.amps.size(); ++u)
      for (Eigen::Index k = 0; k < reg; ++k)
        joint.amps(u * reg + k) = untrusted_input.amps(u) * plus_reg(k);
    const PureState out = apply_w(joint);
    Eigen::VectorXd dist = Eigen::VectorXd::Zero(reg);
    for (Eigen::Index u = 0; u < untrusted_input.amps.size(); ++u)
      for (Eigen::Index k = 0; k < reg; ++k) dist(k) += std::norm(out.amps(u * reg + k));
    return dist;
  }
};

inline LambdaChannel build_lambda(const DeviceModel& device, const AdaptivePlan& plan) {
  const int n = device.num_sites();
  plan.check_valid(n);
  Eigen::Index du = 1;
  for (auto d : device.dims) du *= d;
  if (du * (Eigen::Index(1) << n) > (Eigen::Index(1) << 12))
    throw std::invalid_argument("build_lambda: total dimension above dense limit");

  LambdaChannel ch;
  ch.n = n;
  ch.joint_dims = device.dims;
  for (int l = 0; l < n; ++l) ch.joint_dims.push_back(2);

  // Owning copies for the closure.
  const DeviceModel dev = device;
  const AdaptivePlan pl = plan;
  ch.apply_w = [dev, pl, n](const PureState& joint_in) {
    PureState joint = joint_in;
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    for (int l = 0; l < n; ++l) {
      const int site = pl.order[static_cast<std::size_t>(l)];
      const Eigen::Index d = dev.dims[static_cast<std::size_t>(site)];
      const int reg_site = n + l;
      // Controlled blocks keyed on the first l trusted qubits.
      if (l == 0) {
        const Matrix d0 = detail::plan_observable(dev, site, pl.choose(0, {}));
        const Matrix ctrl = kron(Matrix::Identity(d, d), p0) + kron(d0, p1);
        joint.amps = detail::apply_two_site_matrix(joint, site, reg_site, ctrl);
      } else {
        // Apply each history block separately: project the register
        // prefix, act, and accumulate.
        Vector acc = Vector::Zero(joint.amps.size());
        const std::uint64_t histories = 1ULL << l;
        for (std::uint64_t h = 0; h < histories; ++h) {
          // Mask amplitudes whose first l register qubits equal h.
          PureState masked = joint;
          std::vector<Eigen::Index> stride(joint.dims.size());
          Eigen::Index s = 1;
          for (int q = static_cast<int>(joint.dims.size()) - 1; q >= 0; --q) {
            stride[static_cast<std::size_t>(q)] = s;
            s *= joint.dims[static_cast<std::size_t>(q)];
          }
          for (Eigen::Index idx = 0; idx < joint.amps.size(); ++idx) {
            std::uint64_t prefix = 0;
            for (int q = 0; q < l; ++q)
              prefix = (prefix << 1) |
                       static_cast<std::uint64_t>(
                           (idx / stride[static_cast<std::size_t>(n + q)]) % 2);
            if (prefix != h) masked.amps(idx) = 0.0;
          }
          const auto outcomes = detail::history_outcomes(h << (n - l), l, n);
          const Matrix dl = detail::plan_observable(dev, site, pl.choose(l, outcomes));
          const Matrix ctrl = kron(Matrix::Identity(d, d), p0) + kron(dl, p1);
          acc += detail::apply_two_site_matrix(masked, site, reg_site, ctrl);
        }
        joint.amps = acc;
      }
      joint.amps = detail::apply_site_matrix(joint, reg_site, hadamard());
    }
    return joint;
  };
  return ch;
}

/// Sequential adaptive-measurement simulation: exact outcome distribution
/// by branch enumeration. An Id step yields outcome +1 deterministically
/// (no measurement happens; the register readout of the construction
/// records a 0 bit).
inline Eigen::VectorXd adaptive_outcome_distribution(const DeviceModel& device,
                                                     const AdaptivePlan& plan) {
  const int n = device.num_sites();
  plan.check_valid(n);
  const Eigen::Index reg = Eigen::Index(1) << n;
  Eigen::VectorXd dist = Eigen::VectorXd::Zero(reg);
  std::vector<int> outcomes;
  std::function<void(const Vector&, int, std::uint64_t)> walk = [&](const Vector& amps, int step,
                                                                    std::uint64_t key) {
    if (amps.squaredNorm() < 1e-30) return;
    if (step == n) {
      dist(static_cast<Eigen::Index>(key)) += amps.squaredNorm();
      return;
    }
    const int site = plan.order[static_cast<std::size_t>(step)];
    const PlanChoice c = plan.choose(step, outcomes);
    const Eigen::Index d = device.dims[static_cast<std::size_t>(site)];
    PureState tmp{device.dims, amps};
    if (c == PlanChoice::Id) {
      outcomes.push_back(+1);
      walk(amps, step + 1, key << 1);
      outcomes.pop_back();
      return;
    }
    const Matrix obs = detail::plan_observable(device, site, c);
    Vector plus = detail::apply_site_matrix(tmp, site, 0.5 * (Matrix::Identity(d, d) + obs));
    Vector minus = amps - plus;
    outcomes.push_back(+1);
    walk(plus, step + 1, key << 1);
    outcomes.pop_back();
    outcomes.push_back(-1);
    walk(minus, step + 1, (key << 1) | 1);
    outcomes.pop_back();
  };
  walk(device.state.amps, 0, 0);
  return dist;
}

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

/// POVM-element deviation bound 2 s n delta (8 n delta at s = 4).
inline double povm_bound(int n, double delta, int s = 4) {
  if (n < 1) throw std::invalid_argument("povm_bound: n must be >= 1");
  if (delta < 0) throw std::invalid_argument("povm_bound: delta must be >= 0");
  return 2.0 * s * n * delta;
}

/// Squared trace-distance bound 6 n delta + 3 alpha / m.
inline double state_error_bound(int n, double delta, double alpha, std::int64_t m) {
  if (delta < 0 || alpha < 0) throw std::invalid_argument("state_error_bound: negative input");
  return 6.0 * n * delta + 3.0 * alpha / static_cast<double>(m);
}

/// Bound on the acceptance-probability difference, 14 n delta + 3 alpha / m.
inline double incorrect_accept_bound(int n, double delta, double alpha, std::int64_t m) {
  if (delta < 0 || alpha < 0) throw std::invalid_argument("incorrect_accept_bound: negative input");
  return 14.0 * n * delta + 3.0 * alpha / static_cast<double>(m);
}

// ---------------------------------------------------------------------------
// Dense verification
// ---------------------------------------------------------------------------

namespace detail {

/// Per-site extraction isometry (computational-basis ancilla control).
inline Matrix site_isometry(const DeviceModel& device, int site) {
  return site1_isometry(device.base_observable(site, ObsLabel::X),
                        device.base_observable(site, ObsLabel::Z));
}

/// Max per-observable deviation on one site.
inline double site_deviation(const DeviceModel& device, int site) {
  const Matrix v = site_isometry(device, site);
  double d = 0.0;
  d = std::max(d, operator_deviation(v, device.base_observable(site, ObsLabel::X), pauli_x()));
  d = std::max(d, operator_deviation(v, device.base_observable(site, ObsLabel::Z), pauli_z()));
  d = std::max(d,
               operator_deviation(v, device.base_observable(site, ObsLabel::A0), a_observable(0)));
  d = std::max(d,
               operator_deviation(v, device.base_observable(site, ObsLabel::A1), a_observable(1)));
  return d;
}

/// Tensor-product isometry over all sites, output ordering
/// [untrusted sites..., ancilla qubits...].
inline Matrix full_isometry(const DeviceModel& device) {
  const int n = device.num_sites();
  Eigen::Index du = 1;
  for (auto d : device.dims) du *= d;
  const Eigen::Index reg = Eigen::Index(1) << n;
  Matrix out(du * reg, du);
  std::vector<Eigen::Index> joint_dims = device.dims;
  for (int i = 0; i < n; ++i) joint_dims.push_back(2);
  Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  p1(1, 1) = 1.0;
  for (Eigen::Index col = 0; col < du; ++col) {
    PureState joint;
    joint.dims = joint_dims;
    joint.amps = Vector::Zero(du * reg);
    joint.amps(col * reg) = 1.0;  // ancillas all |0>
    for (int i = 0; i < n; ++i) {
      const Eigen::Index d = device.dims[static_cast<std::size_t>(i)];
      const Matrix id = Matrix::Identity(d, d);
      const int anc = n + i;
      joint.amps = apply_site_matrix(joint, anc, hadamard());
      joint.amps = apply_two_site_matrix(
          joint, i, anc, kron(id, p0) + kron(device.base_observable(i, ObsLabel::Z), p1));
      joint.amps = apply_site_matrix(joint, anc, hadamard());
      joint.amps = apply_two_site_matrix(
          joint, i, anc, kron(id, p0) + kron(device.base_observable(i, ObsLabel::X), p1));
    }
    out.col(col) = joint.amps;
  }
  return out;
}

/// Adaptive POVM element for an outcome subset, built from projector
/// chains over all histories. device_ops = true uses the device
/// observables on the untrusted space; false uses trusted qubit
/// operators on n qubits.
inline Matrix povm_element(const DeviceModel& device, const AdaptivePlan& plan,
                           const std::function<bool(std::uint64_t)>& in_subset,
                           bool device_ops) {
  const int n = device.num_sites();
  std::vector<Eigen::Index> dims;
  if (device_ops)
    dims = device.dims;
  else
    dims.assign(static_cast<std::size_t>(n), 2);
  Eigen::Index dt = 1;
  for (auto d : dims) dt *= d;
  Matrix element = Matrix::Zero(dt, dt);
  const std::uint64_t histories = 1ULL << n;
  for (std::uint64_t k = 0; k < histories; ++k) {
    if (!in_subset(k)) continue;
    Matrix chain = Matrix::Identity(dt, dt);
    for (int l = 0; l < n; ++l) {
      const int site = plan.order[static_cast<std::size_t>(l)];
      const auto outcomes = detail::history_outcomes(k, l, n);
      const PlanChoice c = plan.choose(l, outcomes);
      const double s = ((k >> (n - 1 - l)) & 1) ? -1.0 : +1.0;
      Matrix op = device_ops ? plan_observable(device, site, c) : ideal_observable(c);
      if (c == PlanChoice::Id) {
        if (s < 0) {
          chain = Matrix::Zero(dt, dt);  // Id never yields -1
          break;
        }
        continue;
      }
      const Eigen::Index d = op.rows();
      const Matrix proj = 0.5 * (Matrix::Identity(d, d) + s * op);
      chain = embed_site_operator(proj, site, dims) * chain;
    }
    element += chain.adjoint() * chain;
  }
  return element;
}

/// W_j prefix matrix on [space, register] with space = untrusted dims
/// (device_ops) or n trusted qubits (ideal).
inline Matrix w_prefix_matrix(const DeviceModel& device, const AdaptivePlan& plan, int j,
                              bool device_ops) {
  const int n = device.num_sites();
  std::vector<Eigen::Index> dims;
  if (device_ops)
    dims = device.dims;
  else
    dims.assign(static_cast<std::size_t>(n), 2);
  Eigen::Index dspace = 1;
  for (auto d : dims) dspace *= d;
  const Eigen::Index reg = Eigen::Index(1) << n;
  Matrix w = Matrix::Identity(dspace * reg, dspace * reg);
  for (int l = 0; l < j; ++l) {
    const int site = plan.order[static_cast<std::size_t>(l)];
    // V_l: controlled block per register basis state.
    Matrix v = Matrix::Zero(dspace * reg, dspace * reg);
    for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(reg); ++k) {
      Matrix blk;
      if ((k >> (n - 1 - l)) & 1) {
        const auto outcomes = detail::history_outcomes(k, l, n);
        const PlanChoice c = plan.choose(l, outcomes);
        blk = device_ops
                  ? embed_site_operator(plan_observable(device, site, c), site, dims)
                  : embed_site_operator(ideal_observable(c), site, dims);
      } else {
        blk = Matrix::Identity(dspace, dspace);
      }
      for (Eigen::Index a = 0; a < dspace; ++a)
        for (Eigen::Index b = 0; b < dspace; ++b)
          v(a * reg + static_cast<Eigen::Index>(k), b * reg + static_cast<Eigen::Index>(k)) =
              blk(a, b);
    }
    std::vector<Eigen::Index> reg_dims(static_cast<std::size_t>(n), 2);
    const Matrix h_reg = embed_site_operator(hadamard(), l, reg_dims);
    const Matrix u = kron(Matrix::Identity(dspace, dspace), h_reg);
    w = u * v * w;
  }
  return w;
}

}  // namespace detail

struct CertifyRow {
  std::string name;
  double measured = 0;
  double bound = 0;
  bool pass = false;
};

struct CertificationReport {
  double delta = 0;  // max per-site, per-observable deviation
  std::vector<CertifyRow> rows;
  bool all_pass = false;
};

/// Prefix bounds for the controlled-unitary construction:
/// || U W'_j U^dagger - W_j || <= s j delta, evaluated on the image of
/// the per-site isometries.
inline CertificationReport verify_prefix_bounds(const DeviceModel& device,
                                                const AdaptivePlan& plan, int s = 4) {
  const int n = device.num_sites();
  if (n > 3) throw std::invalid_argument("verify_prefix_bounds: n <= 3 required");
  plan.check_valid(n);
  CertificationReport rep;
  for (int i = 0; i < n; ++i) rep.delta = std::max(rep.delta, detail::site_deviation(device, i));
  const Matrix vv = detail::full_isometry(device);
  const Eigen::Index reg = Eigen::Index(1) << n;
  const Matrix vv_reg = kron(vv, Matrix::Identity(reg, reg));
  Eigen::Index du = 1;
  for (auto d : device.dims) du *= d;
  for (int j = 1; j <= n; ++j) {
    const Matrix w_dev = detail::w_prefix_matrix(device, plan, j, true);
    const Matrix w_ideal = detail::w_prefix_matrix(device, plan, j, false);
    const Matrix ideal_embedded = kron(Matrix::Identity(du, du), w_ideal);
    const double measured = operator_norm(vv_reg * w_dev - ideal_embedded * vv_reg);
    const double bound = s * j * rep.delta;
    rep.rows.push_back({"W_" + std::to_string(j), measured, bound, measured <= bound + 1e-12});
  }
  rep.all_pass = true;
  for (const auto& r : rep.rows) rep.all_pass = rep.all_pass && r.pass;
  return rep;
}

/// Dense certification sweep for one graph device: POVM deviation vs
/// 2 s n delta, the squared trace-distance bound, the fidelity step, and
/// the acceptance-probability difference.
inline CertificationReport verify_certification(const DeviceModel& device, const ColoredGraph& g,
                                                const AdaptivePlan& plan, double alpha,
                                                std::int64_t m, int s = 4) {
  const int n = device.num_sites();
  plan.check_valid(n);
  CertificationReport rep;
  for (int i = 0; i < n; ++i) rep.delta = std::max(rep.delta, detail::site_deviation(device, i));
  const Matrix vv = detail::full_isometry(device);
  Eigen::Index du = 1;
  for (auto d : device.dims) du *= d;

  auto add = [&](const std::string& name, double measured, double bound) {
    rep.rows.push_back({name, measured, bound, measured <= bound + 1e-12});
  };

  // POVM-element deviation for the even-parity outcome subset.
  auto even_parity = [n](std::uint64_t k) {
    int bits = 0;
    for (int l = 0; l < n; ++l) bits += (k >> l) & 1;
    return bits % 2 == 0;
  };
  const Matrix m_dev = detail::povm_element(device, plan, even_parity, true);
  const Matrix m_ideal = detail::povm_element(device, plan, even_parity, false);
  add("povm_deviation", operator_norm(vv * m_dev - kron(Matrix::Identity(du, du), m_ideal) * vv),
      povm_bound(n, rep.delta, s));

  // State error: trace out the untrusted factors of U sigma U^dagger.
  const Vector phi_out = vv * device.state.amps;
  PureState out;
  out.dims = device.dims;
  for (int i = 0; i < n; ++i) out.dims.push_back(2);
  out.amps = phi_out;
  std::vector<int> anc(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) anc[static_cast<std::size_t>(i)] = device.num_sites() + i;
  const Matrix rho_anc = reduced_density(out, anc);
  const Vector gvec = make_graph_state(g).amps;
  const Matrix gproj = gvec * gvec.adjoint();
  const double dist = trace_distance(rho_anc, gproj);
  const double fidelity = (gvec.adjoint() * rho_anc * gvec)(0, 0).real();
  add("fidelity_step", dist * dist, 1.0 - fidelity);
  add("state_error", dist * dist, state_error_bound(n, rep.delta, alpha, m));

  // Acceptance-probability difference for the same POVM element.
  const double p_dev = (device.state.amps.adjoint() * m_dev * device.state.amps)(0, 0).real();
  const double p_ideal = (gvec.adjoint() * m_ideal * gvec)(0, 0).real();
  add("accept_difference", std::abs(p_dev - p_ideal),
      incorrect_accept_bound(n, rep.delta, alpha, m));

  rep.all_pass = true;
  for (const auto& r : rep.rows) rep.all_pass = rep.all_pass && r.pass;
  return rep;
}

/// Margin rows as CSV.
inline std::string certification_csv(const CertificationReport& rep) {
  std::string csv = "name,measured,bound,pass\n";
  for (const auto& r : rep.rows)
    csv += r.name + "," + std::to_string(r.measured) + "," + std::to_string(r.bound) + "," +
           (r.pass ? "1" : "0") + "\n";
  return csv;
}

}  // namespace mbqc

#endif  // MBQC_CERTIFY_HPP
