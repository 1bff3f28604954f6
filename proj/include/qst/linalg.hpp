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

// Dense complex linear algebra: a row-major matrix type, a cyclic Jacobi
// Hermitian eigensolver, unitary Procrustes alignment, Euclidean projection
// onto the probability simplex and power-iteration norm estimates.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "qst/errors.hpp"

namespace qst {

using cplx = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("ComplexMatrix: entry count does not match shape");
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool square() const noexcept { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<cplx> data() noexcept { return data_; }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return s;
  }
  double frobenius_norm() const noexcept { return std::sqrt(squared_norm()); }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](const cplx& z) {
      return std::isfinite(z.real()) && std::isfinite(z.imag());
    });
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same_shape(o, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same_shape(o, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  /// this += s * o
  void axpy(cplx s, const ComplexMatrix& o) {
    check_same_shape(o, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * o.data_[i];
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("matrix product: inner dimensions differ");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      cplx* orow = out.data_.data() + i * out.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{}) continue;
        const cplx* brow = b.data_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j) orow[j] += aik * brow[j];
      }
    }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void check_same_shape(const ComplexMatrix& o, const char* where) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw DimensionError(std::string(where) + ": shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// Frobenius inner product trace(A^H B).
inline cplx inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("inner: shape mismatch");
  }
  cplx s{};
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) s += std::conj(ad[i]) * bd[i];
  return s;
}

/// A^H B without forming A^H.
inline ComplexMatrix adjoint_times(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("adjoint_times: row counts differ");
  ComplexMatrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const auto arow = a.row(k);
    const auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cplx aki = std::conj(arow[i]);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aki * brow[j];
    }
  }
  return out;
}

/// A B^H without forming B^H.
inline ComplexMatrix times_adjoint(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("times_adjoint: column counts differ");
  ComplexMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto brow = b.row(j);
      cplx s{};
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * std::conj(brow[k]);
      out(i, j) = s;
    }
  }
  return out;
}

inline cplx trace(const ComplexMatrix& a) {
  if (!a.square()) throw DimensionError("trace: matrix is not square");
  cplx s{};
  for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
  return s;
}

inline double hermitian_defect(const ComplexMatrix& a) {
  if (!a.square()) throw DimensionError("hermitian_defect: matrix is not square");
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j) - std::conj(a(j, i)));
  return std::sqrt(s);
}

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // nonincreasing
  ComplexMatrix eigenvectors;       // column i pairs with eigenvalue i
};

namespace detail {

inline double offdiag_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. The input is symmetrized as (A + A^H)/2 before iterating.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& input) {
  if (!input.square()) throw DimensionError("hermitian_eig: matrix is not square");
  const std::size_t n = input.rows();
  if (!input.all_finite()) throw DomainError("hermitian_eig: non-finite entries");

  const double norm = input.frobenius_norm();
  if (hermitian_defect(input) > 1e-8 * norm) {
    throw DomainError("hermitian_eig: matrix is not Hermitian");
  }

  ComplexMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = input(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      a(i, j) = 0.5 * (input(i, j) + std::conj(input(j, i)));
      a(j, i) = std::conj(a(i, j));
    }
  }
  ComplexMatrix v = ComplexMatrix::identity(n);

  constexpr int kMaxSweeps = 100;
  const double tol = 1e-12 * norm;
  double off = detail::offdiag_norm(a);
  int sweep = 0;
  for (; sweep < kMaxSweeps && off > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Phase e^{-i phi} turns the pivot block real symmetric; then a real
        // Jacobi rotation diagonalizes it. J = diag(1, e^{-i phi}) * [[c, s], [-s, c]].
        const cplx phase = std::conj(apq) / mag;
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const cplx jpp = c;
        const cplx jpq = s;
        const cplx jqp = -s * phase;
        const cplx jqq = c * phase;

        for (std::size_t k = 0; k < n; ++k) {
          const cplx akp = a(k, p);
          const cplx akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const cplx apk = a(p, k);
          const cplx aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        for (std::size_t k = 0; k < n; ++k) {
          const cplx vkp = v(k, p);
          const cplx vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
    off = detail::offdiag_norm(a);
  }
  if (off > tol) {
    throw NumericalError("hermitian_eig: Jacobi sweeps did not converge", off);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x).real() > a(y, y).real();
  });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    out.eigenvalues[col] = a(order[col], order[col]).real();
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, col) = v(k, order[col]);
  }
  return out;
}

/// V diag(values) V^H.
inline ComplexMatrix reconstruct(const ComplexMatrix& vectors, std::span<const double> values) {
  if (vectors.cols() != values.size()) throw DimensionError("reconstruct: shape mismatch");
  const std::size_t n = vectors.rows();
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cplx s{};
      for (std::size_t k = 0; k < values.size(); ++k)
        s += vectors(i, k) * values[k] * std::conj(vectors(j, k));
      out(i, j) = s;
    }
  return out;
}

namespace detail {

// Modified Gram-Schmidt of `v` against the first `count` columns of `basis`.
// Returns the norm of the residual; `v` is normalized when it is nonzero.
inline double orthonormalize_against(std::vector<cplx>& v, const ComplexMatrix& basis,
                                     std::size_t count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < count; ++c) {
      cplx proj{};
      for (std::size_t k = 0; k < v.size(); ++k) proj += std::conj(basis(k, c)) * v[k];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * basis(k, c);
    }
  }
  double nrm = 0.0;
  for (const auto& z : v) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  if (nrm > 0.0)
    for (auto& z : v) z /= nrm;
  return nrm;
}

// Fill the columns of `basis` beyond `count` with an orthonormal completion.
inline void complete_basis(ComplexMatrix& basis, std::size_t count) {
  const std::size_t dim = basis.rows();
  for (std::size_t e = 0; e < dim && count < basis.cols(); ++e) {
    std::vector<cplx> cand(dim, cplx{});
    cand[e] = 1.0;
    if (orthonormalize_against(cand, basis, count) > 1e-6) {
      for (std::size_t k = 0; k < dim; ++k) basis(k, count) = cand[k];
      ++count;
    }
  }
}

}  // namespace detail

/// Unitary R minimizing ||U - X R||_F. Computed from the SVD of X^H U,
/// which is read off the Jordan-Wielandt embedding [[0, M^H], [M, 0]].
inline ComplexMatrix procrustes_align(const ComplexMatrix& u, const ComplexMatrix& x) {
  if (u.rows() != x.rows() || u.cols() != x.cols()) {
    throw DimensionError("procrustes_align: factors differ in shape");
  }
  const std::size_t r = u.cols();
  if (r == 0 || u.rows() < r) throw DimensionError("procrustes_align: need D >= r >= 1");

  const ComplexMatrix m = adjoint_times(x, u);  // r x r, M = A S B^H
  ComplexMatrix embed(2 * r, 2 * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      embed(r + i, j) = m(i, j);
      embed(j, r + i) = std::conj(m(i, j));
    }
  const auto eig = hermitian_eig(embed);

  // Eigenvectors for +sigma_i are (b_i; a_i)/sqrt(2). Singular values at the
  // noise floor mix with their -sigma partners and are completed instead.
  const double floor = 1e-10 * std::max(m.frobenius_norm(), 1e-300);
  ComplexMatrix left(r, r);
  ComplexMatrix right(r, r);
  std::size_t found = 0;
  for (std::size_t i = 0; i < r; ++i) {
    if (eig.eigenvalues[i] <= floor) break;
    std::vector<cplx> b(r), a(r);
    for (std::size_t k = 0; k < r; ++k) {
      b[k] = eig.eigenvectors(k, i);
      a[k] = eig.eigenvectors(r + k, i);
    }
    const double nb = detail::orthonormalize_against(b, right, found);
    const double na = detail::orthonormalize_against(a, left, found);
    if (nb < 1e-6 || na < 1e-6) break;
    for (std::size_t k = 0; k < r; ++k) {
      right(k, found) = b[k];
      left(k, found) = a[k];
    }
    ++found;
  }
  detail::complete_basis(left, found);
  detail::complete_basis(right, found);
  return times_adjoint(left, right);
}

/// Euclidean projection onto {w : w_i >= 0, sum w_i = 1} by the sorted
/// threshold rule.
inline std::vector<double> simplex_projection(std::span<const double> v) {
  if (v.empty()) throw DimensionError("simplex_projection: empty vector");
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError("simplex_projection: non-finite entry");

  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumsum += sorted[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - t > 0.0) tau = t;
  }
  std::vector<double> w(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = std::max(v[i] - tau, 0.0);
    total += w[i];
  }
  // One renormalization pass absorbs the rounding left by tau.
  if (total > 0.0)
    for (auto& x : w) x /= total;
  return w;
}

/// Largest singular value of the operator `apply` on C^dim, given its adjoint,
/// by power iteration on A^H A with a fixed start vector.
template <class Apply, class ApplyAdjoint>
double power_iteration_norm(std::size_t dim, Apply&& apply, ApplyAdjoint&& apply_adjoint,
                            double rel_tol = 1e-14, int max_iter = 200000) {
  if (dim == 0) return 0.0;
  std::vector<cplx> v(dim);
  // Fixed pseudo-random start: a multiplicative hash keeps it generic
  // (never orthogonal to a structured top singular vector by accident).
  std::uint64_t h = 0x9E3779B97F4A7C15ull;
  for (std::size_t i = 0; i < dim; ++i) {
    h ^= h >> 31;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 29;
    const double re = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
    h *= 0x94D049BB133111EBull;
    const double im = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
    v[i] = {1.0 + re, im};
  }
  auto normalize = [](std::vector<cplx>& x) {
    double s = 0.0;
    for (const auto& z : x) s += std::norm(z);
    s = std::sqrt(s);
    if (s > 0.0)
      for (auto& z : x) z /= s;
    return s;
  };
  normalize(v);
  double prev = -1.0;
  double est = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    std::vector<cplx> av = apply(v);
    std::vector<cplx> w = apply_adjoint(av);
    double rayleigh = 0.0;
    for (std::size_t i = 0; i < dim; ++i) rayleigh += (std::conj(v[i]) * w[i]).real();
    est = std::sqrt(std::max(rayleigh, 0.0));
    if (normalize(w) == 0.0) return 0.0;
    v = std::move(w);
    if (prev >= 0.0 && std::abs(est - prev) <= rel_tol * est) break;
    prev = est;
  }
  return est;
}

/// Largest singular value of a dense matrix.
inline double spectral_norm(const ComplexMatrix& a) {
  if (!a.all_finite()) throw DomainError("spectral_norm: non-finite entries");
  if (a.empty() || a.squared_norm() == 0.0) return 0.0;
  auto apply = [&](const std::vector<cplx>& x) {
    std::vector<cplx> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
      cplx s{};
      for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
      y[i] = s;
    }
    return y;
  };
  auto apply_adj = [&](const std::vector<cplx>& x) {
    std::vector<cplx> y(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) y[j] += std::conj(a(i, j)) * x[i];
    return y;
  };
  return power_iteration_norm(a.cols(), apply, apply_adj);
}

}  // namespace qst
