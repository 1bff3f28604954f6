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

#include <cmath>
#include <utility>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/pauli.hpp"
#include "qst/rng.hpp"

namespace qst {

/// D x r factor U of a state rho = U U^H.
class FactorMatrix {
 public:
  FactorMatrix() = default;
  explicit FactorMatrix(ComplexMatrix u) : u_(std::move(u)) {
    if (!u_.all_finite()) throw DomainError("FactorMatrix: non-finite entries");
  }
  static FactorMatrix zeros(std::size_t dim, std::size_t rank) {
    return FactorMatrix(ComplexMatrix(dim, rank));
  }

  std::size_t dim() const noexcept { return u_.rows(); }
  std::size_t rank() const noexcept { return u_.cols(); }
  const ComplexMatrix& matrix() const noexcept { return u_; }
  ComplexMatrix& matrix() noexcept { return u_; }

  /// U U^H.
  ComplexMatrix gram() const { return times_adjoint(u_, u_); }

 private:
  ComplexMatrix u_;
};

/// D x D Hermitian state matrix.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
    if (!rho_.square()) throw DimensionError("DensityMatrix: matrix is not square");
    const std::size_t d = rho_.rows();
    if (d == 0 || (d & (d - 1)) != 0) throw DimensionError("DensityMatrix: dimension must be 2^n");
    if (hermitian_defect(rho_) > 1e-10 * std::max(1.0, rho_.frobenius_norm())) {
      throw DomainError("DensityMatrix: matrix is not Hermitian");
    }
  }

  std::size_t dim() const noexcept { return rho_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return rho_; }

  /// PSD within 1e-10 and unit trace within 1e-10.
  bool is_physical() const {
    if (std::abs(trace(rho_) - cplx{1.0}) > 1e-10) return false;
    const auto eig = hermitian_eig(rho_);
    return eig.eigenvalues.back() >= -1e-10;
  }

 private:
  ComplexMatrix rho_;
};

struct LowRankState {
  FactorMatrix factor;
  DensityMatrix density;
};

/// U = (A + iB) / ||A + iB||_F with standard-normal A, B; rho = U U^H.
inline LowRankState random_low_rank_state(int n, std::size_t r, Rng& rng) {
  if (n < 1 || n > kMaxDenseQubits) throw DomainError("random_low_rank_state: unsupported qubit count");
  const std::size_t dim = std::size_t{1} << n;
  if (r < 1 || r > dim) throw DomainError("random_low_rank_state: rank must be in 1..2^n");
  ComplexMatrix u(dim, r);
  for (auto& z : u.data()) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = {re, im};
  }
  u *= 1.0 / u.frobenius_norm();
  FactorMatrix factor(std::move(u));
  DensityMatrix density(factor.gram());
  return {std::move(factor), std::move(density)};
}

/// min over unitary R of ||U - X R||_F.
inline double dist(const FactorMatrix& u, const FactorMatrix& x) {
  if (u.dim() != x.dim() || u.rank() != x.rank()) throw DimensionError("dist: shape mismatch");
  const ComplexMatrix r = procrustes_align(u.matrix(), x.matrix());
  return (u.matrix() - x.matrix() * r).frobenius_norm();
}

/// ||U U^H - rho||_F.
inline double recovery_error(const FactorMatrix& u, const DensityMatrix& rho) {
  if (u.dim() != rho.dim()) throw DimensionError("recovery_error: dimension mismatch");
  return (u.gram() - rho.matrix()).frobenius_norm();
}

/// ||U U^H - V V^H||_F from r x r Gram blocks, without forming D x D matrices.
inline double recovery_error(const FactorMatrix& u, const FactorMatrix& v) {
  if (u.dim() != v.dim()) throw DimensionError("recovery_error: dimension mismatch");
  const double uu = adjoint_times(u.matrix(), u.matrix()).squared_norm();
  const double vv = adjoint_times(v.matrix(), v.matrix()).squared_norm();
  const double uv = adjoint_times(u.matrix(), v.matrix()).squared_norm();
  return std::sqrt(std::max(uu + vv - 2.0 * uv, 0.0));
}

}  // namespace qst
