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

// Pauli-basis POVMs, outcome probabilities, multinomial shot simulation and
// empirical Pauli observables.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/pauli.hpp"
#include "qst/rng.hpp"
#include "qst/state.hpp"

namespace qst {

/// Columns are the +1 and -1 eigenvectors of sigma_i; sigma_0 shares the
/// sigma_3 (computational) basis.
inline ComplexMatrix local_eigenbasis(int i) {
  using namespace std::complex_literals;
  const double h = 1.0 / std::sqrt(2.0);
  ComplexMatrix v(2, 2);
  switch (i) {
    case 0:
    case 3: v(0, 0) = 1.0; v(1, 1) = 1.0; break;
    case 1: v(0, 0) = h; v(1, 0) = h; v(0, 1) = h; v(1, 1) = -h; break;
    case 2: v(0, 0) = h; v(1, 0) = -1i * h; v(0, 1) = h; v(1, 1) = 1i * h; break;
    default: throw DomainError("local_eigenbasis: index must be in 0..3");
  }
  return v;
}

/// The D-outcome product POVM measuring one Pauli string. Outcome j has bit
/// (n - q) set when qubit q lands in its "-" eigenvector.
struct PovmSetting {
  PauliString string;
  std::vector<ComplexMatrix> bases;  // one 2x2 unitary per qubit
  std::vector<std::int8_t> signs;    // alpha_j

  std::size_t dim() const noexcept { return string.dim(); }
};

inline PovmSetting build_setting(const PauliString& s) {
  PovmSetting out;
  out.string = s;
  std::uint32_t active = 0;
  for (int q = 0; q < s.qubits(); ++q) {
    out.bases.push_back(local_eigenbasis(s[q]));
    if (s[q] != 0) active |= 1u << (s.qubits() - 1 - q);
  }
  out.signs.resize(s.dim());
  for (std::uint32_t j = 0; j < s.dim(); ++j) {
    out.signs[j] = (std::popcount(j & active) & 1) ? -1 : 1;
  }
  return out;
}

/// V^H B where V is the tensor product of the setting's local eigenbases,
/// contracted one qubit at a time.
inline ComplexMatrix rotate_to_basis(const PovmSetting& setting, const ComplexMatrix& b) {
  if (b.rows() != setting.dim()) throw DimensionError("rotate_to_basis: row count must be 2^n");
  ComplexMatrix y = b;
  const int n = setting.string.qubits();
  for (int q = 0; q < n; ++q) {
    const int k = setting.string[q];
    if (k == 0 || k == 3) continue;
    const ComplexMatrix& v = setting.bases[q];
    const cplx h00 = std::conj(v(0, 0)), h01 = std::conj(v(1, 0));
    const cplx h10 = std::conj(v(0, 1)), h11 = std::conj(v(1, 1));
    const std::uint32_t bit = 1u << (n - 1 - q);
    for (std::uint32_t row = 0; row < y.rows(); ++row) {
      if (row & bit) continue;
      auto r0 = y.row(row);
      auto r1 = y.row(row | bit);
      for (std::size_t c = 0; c < y.cols(); ++c) {
        const cplx a = r0[c], d = r1[c];
        r0[c] = h00 * a + h01 * d;
        r1[c] = h10 * a + h11 * d;
      }
    }
  }
  return y;
}

/// V B, the inverse of rotate_to_basis.
inline ComplexMatrix rotate_from_basis(const PovmSetting& setting, const ComplexMatrix& b) {
  if (b.rows() != setting.dim()) throw DimensionError("rotate_from_basis: row count must be 2^n");
  ComplexMatrix y = b;
  const int n = setting.string.qubits();
  for (int q = 0; q < n; ++q) {
    const int k = setting.string[q];
    if (k == 0 || k == 3) continue;
    const ComplexMatrix& v = setting.bases[q];
    const std::uint32_t bit = 1u << (n - 1 - q);
    for (std::uint32_t row = 0; row < y.rows(); ++row) {
      if (row & bit) continue;
      auto r0 = y.row(row);
      auto r1 = y.row(row | bit);
      for (std::size_t c = 0; c < y.cols(); ++c) {
        const cplx a = r0[c], d = r1[c];
        r0[c] = v(0, 0) * a + v(0, 1) * d;
        r1[c] = v(1, 0) * a + v(1, 1) * d;
      }
    }
  }
  return y;
}

/// p_j = <E_j, U U^H> = ||row_j(V^H U)||^2.
inline std::vector<double> povm_probabilities(const PovmSetting& setting, const FactorMatrix& u) {
  if (u.dim() != setting.dim()) throw DimensionError("povm_probabilities: dimension mismatch");
  const ComplexMatrix y = rotate_to_basis(setting, u.matrix());
  std::vector<double> p(y.rows());
  for (std::size_t j = 0; j < y.rows(); ++j) {
    double s = 0.0;
    for (const auto& z : y.row(j)) s += std::norm(z);
    p[j] = s;
  }
  return p;
}

inline double signed_sum(const PovmSetting& setting, std::span<const double> weights) {
  if (weights.size() != setting.dim()) throw DimensionError("signed_sum: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) s += setting.signs[j] * weights[j];
  return s;
}

/// y = sum_j alpha_j p_j = <W, U U^H>.
inline double true_observable(const PovmSetting& setting, const FactorMatrix& u) {
  const auto p = povm_probabilities(setting, u);
  return signed_sum(setting, p);
}

struct ShotRecord {
  std::size_t setting = 0;
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> counts;
};

/// Multinomial(M, p) counts from M inverse-CDF categorical draws.
inline ShotRecord sample_counts(std::span<const double> p, std::uint64_t shots, Rng& rng,
                                std::size_t setting_index = 0) {
  if (p.empty()) throw DimensionError("sample_counts: empty probability vector");
  std::vector<double> cdf(p.size());
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (!(p[j] >= -1e-9)) throw DomainError("sample_counts: negative probability");
    total += std::max(p[j], 0.0);
    cdf[j] = total;
  }
  if (!(total > 0.0)) throw DomainError("sample_counts: probabilities sum to zero");
  for (auto& c : cdf) c /= total;
  cdf.back() = 1.0;

  ShotRecord rec;
  rec.setting = setting_index;
  rec.shots = shots;
  rec.counts.assign(p.size(), 0);
  for (std::uint64_t m = 0; m < shots; ++m) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++rec.counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return rec;
}

/// y_hat = sum_j alpha_j f_j / M.
inline double empirical_observable(const ShotRecord& record, const PovmSetting& setting) {
  if (record.shots == 0) throw DomainError("empirical_observable: zero shots");
  if (record.counts.size() != setting.dim()) {
    throw DimensionError("empirical_observable: counts do not match setting dimension");
  }
  std::int64_t s = 0;
  for (std::size_t j = 0; j < record.counts.size(); ++j) {
    s += setting.signs[j] * static_cast<std::int64_t>(record.counts[j]);
  }
  return static_cast<double>(s) / static_cast<double>(record.shots);
}

struct ObservableVector {
  std::vector<double> y;      // population
  std::vector<double> y_hat;  // empirical
  std::vector<double> e;      // y_hat - y
};

struct EnsembleMeasurement {
  ObservableVector observables;
  std::vector<ShotRecord> records;
  std::uint64_t copies = 0;  // K * M
};

/// Measures every setting M times. Probabilities are computed once per
/// distinct string.
inline EnsembleMeasurement measure_ensemble(std::span<const PauliString> settings,
                                            const FactorMatrix& truth, std::uint64_t shots,
                                            Rng& rng) {
  if (settings.empty()) throw DomainError("measure_ensemble: need at least one setting");
  if (shots < 1) throw DomainError("measure_ensemble: need at least one shot");
  struct Cached {
    PovmSetting setting;
    std::vector<double> p;
    double y;
  };
  std::map<std::uint64_t, Cached> cache;
  EnsembleMeasurement out;
  const std::size_t k_count = settings.size();
  out.observables.y.resize(k_count);
  out.observables.y_hat.resize(k_count);
  out.observables.e.resize(k_count);
  out.records.reserve(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    auto [it, fresh] = cache.try_emplace(settings[k].code());
    if (fresh) {
      it->second.setting = build_setting(settings[k]);
      it->second.p = povm_probabilities(it->second.setting, truth);
      it->second.y = signed_sum(it->second.setting, it->second.p);
    }
    const Cached& c = it->second;
    ShotRecord rec = sample_counts(c.p, shots, rng, k);
    const double y_hat = empirical_observable(rec, c.setting);
    out.observables.y[k] = c.y;
    out.observables.y_hat[k] = y_hat;
    out.observables.e[k] = y_hat - c.y;
    out.records.push_back(std::move(rec));
  }
  out.copies = static_cast<std::uint64_t>(k_count) * shots;
  return out;
}

/// sum_k w_k W_k with repeated strings merged; terms are kept in ascending
/// code order so reductions are reproducible.
class PauliSum {
 public:
  PauliSum(std::span<const PauliString> strings, std::span<const double> weights) {
    if (strings.size() != weights.size()) throw DimensionError("PauliSum: length mismatch");
    if (strings.empty()) throw DimensionError("PauliSum: no terms");
    std::map<std::uint64_t, std::size_t> slot;
    std::vector<std::pair<PauliString, double>> acc;
    for (std::size_t k = 0; k < strings.size(); ++k) {
      if (strings[k].qubits() != strings[0].qubits()) {
        throw DimensionError("PauliSum: strings differ in qubit count");
      }
      auto [it, fresh] = slot.try_emplace(strings[k].code(), acc.size());
      if (fresh) acc.emplace_back(strings[k], 0.0);
      acc[it->second].second += weights[k];
    }
    for (const auto& [code, idx] : slot) {
      terms_.push_back(acc[idx].first);
      coeffs_.push_back(acc[idx].second);
    }
    dim_ = strings[0].dim();
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<PauliString>& terms() const noexcept { return terms_; }
  const std::vector<double>& coeffs() const noexcept { return coeffs_; }

  std::vector<cplx> apply(std::span<const cplx> x) const {
    if (x.size() != dim_) throw DimensionError("PauliSum::apply: length mismatch");
    std::vector<cplx> y(dim_, cplx{});
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const double w = coeffs_[t];
      if (w == 0.0) continue;
      const auto& s = terms_[t];
      const std::uint32_t xm = s.x_mask();
      for (std::uint32_t b = 0; b < dim_; ++b) y[b ^ xm] += w * s.column_phase(b) * x[b];
    }
    return y;
  }

  ComplexMatrix dense() const {
    ComplexMatrix out(dim_, dim_);
    for (std::size_t t = 0; t < terms_.size(); ++t) {
      const auto& s = terms_[t];
      for (std::uint32_t b = 0; b < dim_; ++b) out(b ^ s.x_mask(), b) += coeffs_[t] * s.column_phase(b);
    }
    return out;
  }

  /// Spectral norm by matrix-free power iteration (the sum is Hermitian).
  double spectral_norm() const {
    auto op = [this](const std::vector<cplx>& v) { return apply(v); };
    return power_iteration_norm(dim_, op, op);
  }

 private:
  std::vector<PauliString> terms_;
  std::vector<double> coeffs_;
  std::size_t dim_ = 0;
};

/// ||A^*(e)|| / K with A^*(e) = sum_k e_k W_k.
inline double operator_error_norm(std::span<const PauliString> settings, std::span<const double> e) {
  if (settings.size() != e.size()) throw DimensionError("operator_error_norm: length mismatch");
  if (settings.empty()) throw DimensionError("operator_error_norm: no settings");
  const PauliSum sum(settings, e);
  return sum.spectral_norm() / static_cast<double>(settings.size());
}

}  // namespace qst
