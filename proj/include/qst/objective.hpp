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

// Least-squares objectives over a factor U (rho = U U^H), with Wirtinger
// gradients taken in the conjugate coordinate:
//
//   observables: f(U) = D/(2K) sum_k (<W_k, U U^H> - y_hat_k)^2
//   basis:       f(U) = D/(2K) sum_{k,j} (<E_{k,j}, U U^H> - p_hat_{k,j})^2
//
// Repeated strings are merged into groups: sum_k (a - y_k)^2 over a group of
// c copies equals c (a - mean)^2 plus the within-group scatter of y.

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/measurement.hpp"
#include "qst/pauli.hpp"
#include "qst/state.hpp"

namespace qst {

struct LossGradient {
  double loss = 0.0;
  ComplexMatrix gradient;  // d f / d conj(U)
};

namespace detail {

// Re tr(A^H W B) = Re sum_c sum_b conj(A[b^x, c]) phase(b) B[b, c].
inline cplx pauli_form(const PauliString& s, const ComplexMatrix& a, const ComplexMatrix& b) {
  cplx total{};
  const std::uint32_t x = s.x_mask();
  const std::size_t cols = b.cols();
  for (std::uint32_t row = 0; row < b.rows(); ++row) {
    const auto arow = a.row(row ^ x);
    const auto brow = b.row(row);
    cplx acc{};
    for (std::size_t c = 0; c < cols; ++c) acc += std::conj(arow[c]) * brow[c];
    total += s.column_phase(row) * acc;
  }
  return total;
}

// out += w * W_s * B
inline void accumulate_pauli(const PauliString& s, double w, const ComplexMatrix& b,
                             ComplexMatrix& out) {
  const std::uint32_t x = s.x_mask();
  for (std::uint32_t row = 0; row < b.rows(); ++row) {
    const cplx ph = w * s.column_phase(row);
    const auto src = b.row(row);
    auto dst = out.row(row ^ x);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += ph * src[c];
  }
}

}  // namespace detail

/// Factorized least squares on empirical Pauli observables.
class SensingProblem {
 public:
  struct Group {
    PauliString string;
    double count = 0.0;
    double mean = 0.0;  // mean y_hat over the group's copies
  };

  SensingProblem(std::vector<PauliString> settings, std::vector<double> y_hat)
      : settings_(std::move(settings)), y_hat_(std::move(y_hat)) {
    if (settings_.empty()) throw DimensionError("SensingProblem: need K >= 1 settings");
    if (settings_.size() != y_hat_.size()) throw DimensionError("SensingProblem: K mismatch");
    qubits_ = settings_[0].qubits();
    dim_ = settings_[0].dim();
    std::map<std::uint64_t, std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      if (settings_[k].qubits() != qubits_) throw DimensionError("SensingProblem: mixed qubit counts");
      members[settings_[k].code()].push_back(k);
    }
    for (const auto& [code, idx] : members) {
      double sum = 0.0;
      for (auto k : idx) sum += y_hat_[k];
      const double mean = sum / static_cast<double>(idx.size());
      for (auto k : idx) scatter_ += (y_hat_[k] - mean) * (y_hat_[k] - mean);
      groups_.push_back({settings_[idx[0]], static_cast<double>(idx.size()), mean});
    }
  }

  int qubits() const noexcept { return qubits_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t settings_count() const noexcept { return settings_.size(); }
  double scale() const noexcept { return static_cast<double>(dim_) / static_cast<double>(settings_.size()); }
  const std::vector<PauliString>& settings() const noexcept { return settings_; }
  const std::vector<double>& y_hat() const noexcept { return y_hat_; }
  const std::vector<Group>& groups() const noexcept { return groups_; }
  double scatter() const noexcept { return scatter_; }

  void check(const ComplexMatrix& u) const {
    if (u.rows() != dim_) throw DimensionError("SensingProblem: factor has wrong row count");
  }

  /// A(U U^H) per setting.
  std::vector<double> forward(const FactorMatrix& u) const {
    check(u.matrix());
    std::vector<double> out(settings_.size());
    std::map<std::uint64_t, double> cache;
    for (std::size_t k = 0; k < settings_.size(); ++k) {
      auto [it, fresh] = cache.try_emplace(settings_[k].code(), 0.0);
      if (fresh) it->second = detail::pauli_form(settings_[k], u.matrix(), u.matrix()).real();
      out[k] = it->second;
    }
    return out;
  }

  LossGradient evaluate(const FactorMatrix& u, bool with_gradient = true) const {
    const ComplexMatrix& um = u.matrix();
    check(um);
    LossGradient out;
    if (with_gradient) out.gradient = ComplexMatrix(um.rows(), um.cols());
    double sq = 0.0;
    for (const auto& g : groups_) {
      const double a = detail::pauli_form(g.string, um, um).real();
      const double resid = a - g.mean;
      sq += g.count * resid * resid;
      if (with_gradient) detail::accumulate_pauli(g.string, scale() * g.count * resid, um, out.gradient);
    }
    out.loss = 0.5 * scale() * (sq + scatter_);
    return out;
  }

 private:
  std::vector<PauliString> settings_;
  std::vector<double> y_hat_;
  std::vector<Group> groups_;
  double scatter_ = 0.0;
  int qubits_ = 0;
  std::size_t dim_ = 0;
};

inline double loss_value(const SensingProblem& p, const FactorMatrix& u) {
  return p.evaluate(u, false).loss;
}

/// (D/K) sum_k (<W_k, U U^H> - y_hat_k) W_k U.
inline ComplexMatrix wirtinger_gradient(const SensingProblem& p, const FactorMatrix& u) {
  return p.evaluate(u, true).gradient;
}

/// Wirtinger Hessian quadratic form on the direction (Delta, conj(Delta)):
///   (2D/K) sum |z_k|^2 + (2D/K) sum Re(z_k^2) + (2D/K) <A^*(A(UU^H) - y_hat), Delta Delta^H>
/// with z_k = <W_k, U Delta^H>. Equals d^2/dt^2 f(U + t Delta) at t = 0.
inline double hessian_quadratic_form(const SensingProblem& p, const FactorMatrix& u,
                                     const ComplexMatrix& delta) {
  const ComplexMatrix& um = u.matrix();
  p.check(um);
  if (delta.rows() != um.rows() || delta.cols() != um.cols()) {
    throw DimensionError("hessian_quadratic_form: direction shape mismatch");
  }
  double first = 0.0, second = 0.0, third = 0.0;
  for (const auto& g : p.groups()) {
    const cplx z = detail::pauli_form(g.string, delta, um);
    const double a = detail::pauli_form(g.string, um, um).real();
    const double b = detail::pauli_form(g.string, delta, delta).real();
    first += g.count * std::norm(z);
    second += g.count * (z * z).real();
    third += g.count * (a - g.mean) * b;
  }
  return 2.0 * p.scale() * (first + second + third);
}

/// Factorized least squares on the empirical outcome probabilities of the
/// Pauli-basis POVMs themselves.
class BasisProblem {
 public:
  struct Group {
    PovmSetting setting;
    double count = 0.0;
    std::vector<double> mean;  // mean p_hat per outcome
  };

  /// `p_hat` holds K rows of D empirical probabilities.
  BasisProblem(std::vector<PauliString> settings, std::vector<std::vector<double>> p_hat)
      : settings_count_(settings.size()) {
    if (settings.empty()) throw DimensionError("BasisProblem: need K >= 1 settings");
    if (settings.size() != p_hat.size()) throw DimensionError("BasisProblem: K mismatch");
    dim_ = settings[0].dim();
    std::map<std::uint64_t, std::vector<std::size_t>> members;
    for (std::size_t k = 0; k < settings.size(); ++k) {
      if (settings[k].dim() != dim_ || p_hat[k].size() != dim_) {
        throw DimensionError("BasisProblem: p_hat must have K x D entries");
      }
      members[settings[k].code()].push_back(k);
    }
    for (const auto& [code, idx] : members) {
      Group g{build_setting(settings[idx[0]]), static_cast<double>(idx.size()),
              std::vector<double>(dim_, 0.0)};
      for (auto k : idx)
        for (std::size_t j = 0; j < dim_; ++j) g.mean[j] += p_hat[k][j];
      for (auto& m : g.mean) m /= g.count;
      for (auto k : idx)
        for (std::size_t j = 0; j < dim_; ++j) {
          const double d = p_hat[k][j] - g.mean[j];
          scatter_ += d * d;
        }
      groups_.push_back(std::move(g));
    }
  }

  static BasisProblem from_records(const std::vector<PauliString>& settings,
                                   std::span<const ShotRecord> records) {
    if (settings.size() != records.size()) throw DimensionError("BasisProblem: record count mismatch");
    std::vector<std::vector<double>> p_hat(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
      if (records[k].shots == 0) throw DomainError("BasisProblem: zero-shot record");
      p_hat[k].resize(records[k].counts.size());
      for (std::size_t j = 0; j < records[k].counts.size(); ++j)
        p_hat[k][j] = static_cast<double>(records[k].counts[j]) / static_cast<double>(records[k].shots);
    }
    return BasisProblem(settings, std::move(p_hat));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t settings_count() const noexcept { return settings_count_; }
  double scale() const noexcept { return static_cast<double>(dim_) / static_cast<double>(settings_count_); }
  const std::vector<Group>& groups() const noexcept { return groups_; }

  LossGradient evaluate(const FactorMatrix& u, bool with_gradient = true) const {
    const ComplexMatrix& um = u.matrix();
    if (um.rows() != dim_) throw DimensionError("BasisProblem: factor has wrong row count");
    LossGradient out;
    if (with_gradient) out.gradient = ComplexMatrix(um.rows(), um.cols());
    double sq = 0.0;
    for (const auto& g : groups_) {
      ComplexMatrix y = rotate_to_basis(g.setting, um);
      for (std::size_t j = 0; j < dim_; ++j) {
        double q = 0.0;
        for (const auto& z : y.row(j)) q += std::norm(z);
        const double resid = q - g.mean[j];
        sq += g.count * resid * resid;
        if (with_gradient) {
          const double w = scale() * g.count * resid;
          for (auto& z : y.row(j)) z *= w;
        }
      }
      if (with_gradient) out.gradient += rotate_from_basis(g.setting, y);
    }
    out.loss = 0.5 * scale() * (sq + scatter_);
    return out;
  }

 private:
  std::vector<Group> groups_;
  std::size_t settings_count_ = 0;
  std::size_t dim_ = 0;
  double scatter_ = 0.0;
};

inline double basis_loss(const BasisProblem& p, const FactorMatrix& u) {
  return p.evaluate(u, false).loss;
}

inline ComplexMatrix basis_gradient(const BasisProblem& p, const FactorMatrix& u) {
  return p.evaluate(u, true).gradient;
}

}  // namespace qst
