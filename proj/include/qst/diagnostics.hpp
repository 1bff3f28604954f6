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
#include <span>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/measurement.hpp"
#include "qst/state.hpp"

namespace qst {

/// Nearest PSD unit-trace matrix to a Hermitian input in Frobenius norm:
/// eigenvalues are projected onto the probability simplex.
inline DensityMatrix physical_projection(const ComplexMatrix& hermitian) {
  const auto eig = hermitian_eig(hermitian);
  const auto w = simplex_projection(eig.eigenvalues);
  ComplexMatrix out = reconstruct(eig.eigenvectors, w);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    out(i, i) = out(i, i).real();
    for (std::size_t j = i + 1; j < out.cols(); ++j) out(j, i) = std::conj(out(i, j));
  }
  return DensityMatrix(std::move(out));
}

inline DensityMatrix physical_projection(const FactorMatrix& u) {
  return physical_projection(u.gram());
}

/// h(d) = (sqrt(2) + sqrt(82.55 - 762.54 d - 843.09 d^2)) / (1.5 - 15.7 d),
/// the landscape constant multiplying the noise term of the critical-point
/// error bound.
inline double error_bound_h(double delta) {
  if (!std::isfinite(delta) || delta < 0.0) throw DomainError("error_bound_h: delta must be >= 0");
  const double denom = 1.5 - 15.7 * delta;
  const double radicand = 82.55 - 762.54 * delta - 843.09 * delta * delta;
  if (!(denom > 0.0) || radicand < 0.0) throw DomainError("error_bound_h: delta outside domain");
  return (std::sqrt(2.0) + std::sqrt(radicand)) / denom;
}

/// D sqrt(r) h(delta) ||A^*(e)|| / K.
inline double theorem_bound_rhs(double delta, std::size_t rank, std::span<const PauliString> settings,
                                std::span<const double> e) {
  const double h = error_bound_h(delta);
  if (settings.empty()) throw DimensionError("theorem_bound_rhs: no settings");
  const double d = static_cast<double>(settings[0].dim());
  return d * std::sqrt(static_cast<double>(rank)) * h * operator_error_norm(settings, e);
}

}  // namespace qst
