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

#ifndef MBQC_LINALG_HPP
#define MBQC_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <complex>
#include <stdexcept>

namespace mbqc {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline bool is_hermitian(const Matrix& m, double tol = 1e-12) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  Matrix d = m.adjoint() * m;
  d -= Matrix::Identity(m.cols(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

/// m^2 == I within tol, i.e. Hermitian m has spectrum in {+1, -1}.
inline bool squares_to_identity(const Matrix& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  Matrix d = m * m;
  d -= Matrix::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff() <= tol;
}

/// Spectral norm (largest singular value). Dense SVD up to 2^10,
/// power iteration on A^dagger A above that.
inline double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() <= 1024 && m.cols() <= 1024) {
    return m.jacobiSvd().singularValues()(0);
  }
  const Matrix g = m.adjoint() * m;
  Vector v = Vector::Ones(g.rows());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Vector w = g * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    w /= next;
    if (std::abs(next - lambda) <= 1e-8 * next && it > 2) {
      lambda = next;
      break;
    }
    lambda = next;
    v = w;
  }
  return std::sqrt(lambda);
}

/// Trace distance (1/2)*sum |eigenvalues| of the Hermitian difference.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Qubit operators.
inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix hadamard() {
  Matrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

/// (X + (-1)^i Z)/sqrt(2); squares to the identity.
inline Matrix a_observable(int i) {
  const double sign = (i % 2 == 0) ? 1.0 : -1.0;
  return (pauli_x() + sign * pauli_z()) / std::sqrt(2.0);
}

/// Real rotation by theta in the qubit plane.
inline Matrix rotation(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return m;
}

/// Conjugate a qubit observable by rotation(theta/2): Z -> cos(theta) Z + sin(theta) X etc.
inline Matrix rotated(const Matrix& obs, double theta) {
  const Matrix r = rotation(theta / 2.0);
  return r * obs * r.adjoint();
}

}  // namespace mbqc

#endif  // MBQC_LINALG_HPP
