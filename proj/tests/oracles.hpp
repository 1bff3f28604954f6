// Copyright 2026 The qst-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Test-only reference computations. Nothing here calls the routine it is
// used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qst/linalg.hpp"
#include "qst/pauli.hpp"
#include "qst/rng.hpp"

namespace qst::oracle {

inline ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (auto& z : m.data()) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = {re, im};
  }
  return m;
}

inline ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  ComplexMatrix a = random_matrix(n, n, rng);
  ComplexMatrix h = a + a.adjoint();
  h *= 0.5;
  for (std::size_t i = 0; i < n; ++i) h(i, i) = h(i, i).real();
  return h;
}

/// Haar-ish unitary from classical Gram-Schmidt of a Gaussian matrix.
inline ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
  ComplexMatrix a = random_matrix(n, n, rng);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      std::complex<double> proj{};
      for (std::size_t k = 0; k < n; ++k) proj += std::conj(a(k, p)) * a(k, c);
      for (std::size_t k = 0; k < n; ++k) a(k, c) -= proj * a(k, p);
    }
    double nrm = 0.0;
    for (std::size_t k = 0; k < n; ++k) nrm += std::norm(a(k, c));
    nrm = std::sqrt(nrm);
    for (std::size_t k = 0; k < n; ++k) a(k, c) /= nrm;
  }
  return a;
}

/// Entry (i, j) of a Pauli string as a product of single-qubit entries.
inline ComplexMatrix pauli_by_entries(const PauliString& s) {
  using namespace std::complex_literals;
  const std::complex<double> table[4][2][2] = {
      {{1.0, 0.0}, {0.0, 1.0}},
      {{0.0, 1.0}, {1.0, 0.0}},
      {{0.0, 1i}, {-1i, 0.0}},
      {{1.0, 0.0}, {0.0, -1.0}},
  };
  const int n = s.qubits();
  const std::size_t d = s.dim();
  ComplexMatrix w(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      std::complex<double> v = 1.0;
      for (int q = 0; q < n; ++q) {
        const int bi = (i >> (n - 1 - q)) & 1;
        const int bj = (j >> (n - 1 - q)) & 1;
        v *= table[s[q]][bi][bj];
      }
      w(i, j) = v;
    }
  return w;
}

/// Dense E_{k,j} = (x)_q v_q v_q^H using the explicit single-qubit eigenvectors.
inline ComplexMatrix projector_by_entries(const PauliString& s, std::size_t outcome) {
  using namespace std::complex_literals;
  const double h = 1.0 / std::sqrt(2.0);
  // vec[k][sign][component]
  const std::complex<double> vec[4][2][2] = {
      {{1.0, 0.0}, {0.0, 1.0}},
      {{h, h}, {h, -h}},
      {{h, -1i * h}, {h, 1i * h}},
      {{1.0, 0.0}, {0.0, 1.0}},
  };
  const int n = s.qubits();
  const std::size_t d = s.dim();
  std::vector<std::complex<double>> psi(d, 1.0);
  for (std::size_t i = 0; i < d; ++i)
    for (int q = 0; q < n; ++q) {
      const int bit = (outcome >> (n - 1 - q)) & 1;
      const int comp = (i >> (n - 1 - q)) & 1;
      psi[i] *= vec[s[q]][bit][comp];
    }
  ComplexMatrix e(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) e(i, j) = psi[i] * std::conj(psi[j]);
  return e;
}

/// Naive triple-loop product.
inline ComplexMatrix naive_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      std::complex<double> s{};
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline double trace_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  std::complex<double> s{};
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, i);
  return s.real();
}

/// Eigenvalues of a 2x2 Hermitian matrix from the quadratic formula, descending.
inline std::vector<double> eig2(const ComplexMatrix& a) {
  const double p = a(0, 0).real(), q = a(1, 1).real();
  const double disc = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(a(0, 1)));
  return {0.5 * (p + q) + disc, 0.5 * (p + q) - disc};
}

/// Eigenvalues of a 3x3 Hermitian matrix as roots of its characteristic
/// polynomial (trigonometric form), descending.
inline std::vector<double> eig3(const ComplexMatrix& a) {
  const double a00 = a(0, 0).real(), a11 = a(1, 1).real(), a22 = a(2, 2).real();
  const double c2 = -(a00 + a11 + a22);
  const double c1 = a00 * a11 + a00 * a22 + a11 * a22 - std::norm(a(0, 1)) - std::norm(a(0, 2)) -
                    std::norm(a(1, 2));
  const double det = a00 * a11 * a22 + 2.0 * (a(0, 1) * a(1, 2) * a(2, 0)).real() -
                     a00 * std::norm(a(1, 2)) - a11 * std::norm(a(0, 2)) - a22 * std::norm(a(0, 1));
  const double c0 = -det;
  // x^3 + c2 x^2 + c1 x + c0, shift x = t - c2/3
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double m = 2.0 * std::sqrt(std::max(-p / 3.0, 0.0));
  const double arg = (m == 0.0) ? 0.0 : std::clamp(3.0 * q / (p * m), -1.0, 1.0);
  const double theta = std::acos(arg) / 3.0;
  std::vector<double> roots(3);
  for (int k = 0; k < 3; ++k) roots[k] = m * std::cos(theta - 2.0 * M_PI * k / 3.0) - c2 / 3.0;
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

/// Exact simplex projection by enumerating every support set and keeping
/// the feasible KKT point closest to v. Exponential; small inputs only.
inline std::vector<double> simplex_by_active_sets(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        sum += v[i];
        ++cnt;
      }
    const double shift = (sum - 1.0) / cnt;
    std::vector<double> w(n, 0.0);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) {
        w[i] = v[i] - shift;
        if (w[i] < 0.0) ok = false;
      }
    if (!ok) continue;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (w[i] - v[i]) * (w[i] - v[i]);
    if (d < best_d) {
      best_d = d;
      best = w;
    }
  }
  return best;
}

/// min over sampled unitaries Q of ||U - X Q||_F.
inline double random_search_alignment(const ComplexMatrix& u, const ComplexMatrix& x, int samples,
                                      Rng& rng) {
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const ComplexMatrix q = random_unitary(u.cols(), rng);
    best = std::min(best, (u - naive_product(x, q)).frobenius_norm());
  }
  return best;
}

/// Central differences of f along Re and Im of every entry of U.
/// Returns G with Re G_ij = df/dRe U_ij, Im G_ij = df/dIm U_ij.
inline ComplexMatrix finite_difference_gradient(const std::function<double(const ComplexMatrix&)>& f,
                                                const ComplexMatrix& u, double h = 1e-6) {
  ComplexMatrix g(u.rows(), u.cols());
  ComplexMatrix w = u;
  for (std::size_t i = 0; i < u.rows(); ++i)
    for (std::size_t j = 0; j < u.cols(); ++j) {
      const std::complex<double> orig = w(i, j);
      w(i, j) = orig + std::complex<double>(h, 0.0);
      const double fp = f(w);
      w(i, j) = orig - std::complex<double>(h, 0.0);
      const double fm = f(w);
      w(i, j) = orig + std::complex<double>(0.0, h);
      const double gp = f(w);
      w(i, j) = orig - std::complex<double>(0.0, h);
      const double gm = f(w);
      w(i, j) = orig;
      g(i, j) = {(fp - fm) / (2.0 * h), (gp - gm) / (2.0 * h)};
    }
  return g;
}

}  // namespace qst::oracle
