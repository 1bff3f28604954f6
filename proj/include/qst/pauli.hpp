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

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/rng.hpp"

namespace qst {

inline constexpr int kMaxDenseQubits = 12;

/// Single-qubit Pauli matrix sigma_i, i in 0..3, with
/// sigma_2 = [[0, i], [-i, 0]].
inline ComplexMatrix pauli_single(int i) {
  using namespace std::complex_literals;
  ComplexMatrix m(2, 2);
  switch (i) {
    case 0: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 2: m(0, 1) = 1i; m(1, 0) = -1i; break;
    case 3: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw DomainError("pauli_single: index must be in 0..3");
  }
  return m;
}

/// n-qubit Pauli string sigma_{k1} (x) ... (x) sigma_{kn}. Qubit 1 is the most
/// significant Kronecker factor and the most significant row-index bit.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<std::uint8_t> indices) : indices_(std::move(indices)) {
    if (indices_.empty() || indices_.size() > 32) {
      throw DomainError("PauliString: qubit count must be in 1..32");
    }
    for (std::size_t q = 0; q < indices_.size(); ++q) {
      const auto k = indices_[q];
      if (k > 3) throw DomainError("PauliString: index must be in 0..3");
      const std::uint32_t bit = 1u << (indices_.size() - 1 - q);
      if (k == 1 || k == 2) x_mask_ |= bit;
      if (k == 2 || k == 3) yz_mask_ |= bit;
      if (k == 2) ++y_count_;
    }
  }

  /// From the 1-based flat index k in [1, 4^n], base 4 big-endian.
  static PauliString from_flat_index(int n, std::uint64_t k) {
    if (n < 1 || n > 32) throw DomainError("PauliString: qubit count must be in 1..32");
    if (k < 1 || (n < 32 && k > (std::uint64_t{1} << (2 * n)))) {
      throw DomainError("PauliString: flat index out of range");
    }
    std::uint64_t code = k - 1;
    std::vector<std::uint8_t> idx(n);
    for (int q = n - 1; q >= 0; --q) {
      idx[q] = static_cast<std::uint8_t>(code & 3u);
      code >>= 2;
    }
    return PauliString(std::move(idx));
  }

  int qubits() const noexcept { return static_cast<int>(indices_.size()); }
  std::size_t dim() const noexcept { return std::size_t{1} << indices_.size(); }
  const std::vector<std::uint8_t>& indices() const noexcept { return indices_; }
  std::uint8_t operator[](std::size_t q) const { return indices_.at(q); }

  /// 0-based base-4 code; flat_index() = code() + 1.
  std::uint64_t code() const noexcept {
    std::uint64_t c = 0;
    for (auto k : indices_) c = (c << 2) | k;
    return c;
  }
  std::uint64_t flat_index() const noexcept { return code() + 1; }

  bool is_identity() const noexcept { return x_mask_ == 0 && yz_mask_ == 0; }

  /// Row-index bits flipped by the string (sigma_1, sigma_2 factors).
  std::uint32_t x_mask() const noexcept { return x_mask_; }
  /// Row-index bits that pick up a sign (sigma_2, sigma_3 factors).
  std::uint32_t yz_mask() const noexcept { return yz_mask_; }

  /// The nonzero entry of column b sits in row b ^ x_mask() and equals
  /// (-i)^{#sigma_2} * (-1)^{popcount(b & yz_mask())}.
  cplx column_phase(std::uint32_t b) const noexcept {
    static constexpr cplx kBase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    const cplx base = kBase[y_count_ & 3];
    return (std::popcount(b & yz_mask_) & 1) ? -base : base;
  }

  std::string to_string() const {
    std::string s;
    for (auto k : indices_) s.push_back(static_cast<char>('0' + k));
    return s;
  }

  friend bool operator==(const PauliString& a, const PauliString& b) {
    return a.indices_ == b.indices_;
  }

 private:
  std::vector<std::uint8_t> indices_;
  std::uint32_t x_mask_ = 0;
  std::uint32_t yz_mask_ = 0;
  int y_count_ = 0;
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Dense Kronecker product of the string's single-qubit factors.
inline ComplexMatrix pauli_dense(const PauliString& s) {
  if (s.qubits() > kMaxDenseQubits) throw DomainError("pauli_dense: too many qubits");
  ComplexMatrix out = pauli_single(s[0]);
  for (int q = 1; q < s.qubits(); ++q) out = kron(out, pauli_single(s[q]));
  return out;
}

/// W_s * B in O(D * cols) using the signed-permutation structure of W_s.
inline ComplexMatrix apply_pauli_string(const PauliString& s, const ComplexMatrix& b) {
  if (b.rows() != s.dim()) throw DimensionError("apply_pauli_string: row count must be 2^n");
  ComplexMatrix out(b.rows(), b.cols());
  const std::uint32_t x = s.x_mask();
  for (std::uint32_t row = 0; row < b.rows(); ++row) {
    const cplx ph = s.column_phase(row);
    const auto src = b.row(row);
    auto dst = out.row(row ^ x);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = ph * src[c];
  }
  return out;
}

/// K strings drawn uniformly with replacement from all 4^n, identity included.
inline std::vector<PauliString> random_pauli_strings(int n, std::size_t count, Rng& rng) {
  if (n < 1 || n > 31) throw DomainError("random_pauli_strings: qubit count must be in 1..31");
  if (count < 1) throw DomainError("random_pauli_strings: need at least one setting");
  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  std::vector<PauliString> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(PauliString::from_flat_index(n, rng.below(total) + 1));
  }
  return out;
}

}  // namespace qst
