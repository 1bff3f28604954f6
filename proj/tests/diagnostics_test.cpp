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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qst/diagnostics.hpp"
#include "qst/optimizer.hpp"

namespace qst {
namespace {

// Independent evaluation in long double.
long double h_reference(long double d) {
  const long double num = std::sqrt(2.0L) + std::sqrt(82.55L - 762.54L * d - 843.09L * d * d);
  return num / (1.5L - 15.7L * d);
}

ComplexMatrix random_physical(std::size_t d, Rng& rng) {
  const auto a = oracle::random_matrix(d, d, rng);
  auto rho = times_adjoint(a, a);
  rho *= 1.0 / trace(rho).real();
  return rho;
}

void expect_physical(const DensityMatrix& p) {
  const auto eig = hermitian_eig(p.matrix());
  EXPECT_GE(eig.eigenvalues.back(), -1e-12);
  EXPECT_NEAR(trace(p.matrix()).real(), 1.0, 1e-10);
}

TEST(PhysicalProjection, AlreadyPhysicalIsFixed) {
  Rng rng(1);
  const auto st = random_low_rank_state(3, 2, rng);
  EXPECT_LE((physical_projection(st.factor).matrix() - st.density.matrix()).frobenius_norm(), 1e-10);
}

TEST(PhysicalProjection, ScaledPureStateMapsBack) {
  Rng rng(2);
  const auto st = random_low_rank_state(3, 1, rng);
  const FactorMatrix doubled(st.factor.matrix() * 2.0);
  EXPECT_LE((physical_projection(doubled).matrix() - st.density.matrix()).frobenius_norm(), 1e-10);
}

TEST(PhysicalProjection, OutputIsPhysicalAndIdempotent) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = std::size_t{1} << (1 + rng.below(4));
    const auto h = oracle::random_hermitian(d, rng);
    const auto p = physical_projection(h);
    expect_physical(p);
    EXPECT_LE((physical_projection(p.matrix()).matrix() - p.matrix()).frobenius_norm(), 1e-10);
  }
}

TEST(PhysicalProjection, NonexpansiveTowardPhysicalStates) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const std::size_t d = std::size_t{1} << (1 + rng.below(3));
    const FactorMatrix u(oracle::random_matrix(d, 1 + rng.below(d), rng));
    const auto sigma = random_physical(d, rng);
    const double before = (u.gram() - sigma).frobenius_norm();
    const double after = (physical_projection(u).matrix() - sigma).frobenius_norm();
    EXPECT_LE(after, before + 1e-10);
  }
}

TEST(PhysicalProjection, MatchesEigenvalueSimplexOracle) {
  Rng rng(5);
  const auto h = oracle::random_hermitian(4, rng);
  const auto eig = hermitian_eig(h);
  const auto w = oracle::simplex_by_active_sets(eig.eigenvalues);
  const auto ref = reconstruct(eig.eigenvectors, w);
  EXPECT_LE((physical_projection(h).matrix() - ref).frobenius_norm(), 1e-12);
}

TEST(ErrorBoundH, KnownValues) {
  EXPECT_NEAR(error_bound_h(0.0), (std::sqrt(2.0) + std::sqrt(82.55)) / 1.5, 1e-15);
  EXPECT_NEAR(error_bound_h(0.0), 7.0005, 1e-3);
  EXPECT_NEAR(error_bound_h(0.09), 46.9, 0.05);
  EXPECT_NEAR(error_bound_h(0.09), static_cast<double>(h_reference(0.09L)), 1e-9);
}

TEST(ErrorBoundH, StrictlyIncreasingOnGrid) {
  double prev = error_bound_h(0.0);
  for (int i = 1; i < 100; ++i) {
    const double v = error_bound_h(0.09 * i / 99.0);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ErrorBoundH, DomainErrors) {
  EXPECT_THROW(error_bound_h(-0.01), DomainError);
  EXPECT_THROW(error_bound_h(0.0956), DomainError);  // denominator crosses zero
  EXPECT_THROW(error_bound_h(0.2), DomainError);
  EXPECT_THROW(error_bound_h(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST(TheoremBound, ZeroAndLinearInNoise) {
  Rng rng(6);
  const auto settings = random_pauli_strings(3, 50, rng);
  std::vector<double> e(50);
  EXPECT_EQ(theorem_bound_rhs(0.09, 1, settings, e), 0.0);
  for (auto& v : e) v = 0.1 * rng.normal();
  std::vector<double> e2 = e;
  for (auto& v : e2) v *= 2.0;
  const double b1 = theorem_bound_rhs(0.09, 2, settings, e);
  EXPECT_NEAR(theorem_bound_rhs(0.09, 2, settings, e2), 2.0 * b1, 1e-10 * b1);
  const double expect = 8.0 * std::sqrt(2.0) * error_bound_h(0.09) * operator_error_norm(settings, e);
  EXPECT_NEAR(b1, expect, 1e-12 * expect);
  EXPECT_THROW(theorem_bound_rhs(0.5, 1, settings, e), DomainError);
}

TEST(TheoremBound, DominatesAchievedErrorAtDeskScale) {
  Rng rng(7);
  int held = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto truth = random_low_rank_state(4, 1, rng);
    const auto settings = random_pauli_strings(4, 2000, rng);
    const auto meas = measure_ensemble(settings, truth.factor, 100, rng);
    const SensingProblem p(settings, meas.observables.y_hat);
    OptimizerConfig cfg;
    const auto tr = gd_run(p, spectral_init(p, 1), cfg);
    held += recovery_error(tr.final_factor, truth.factor) <=
            theorem_bound_rhs(0.09, 1, settings, meas.observables.e);
  }
  EXPECT_EQ(held, 5);
}

}  // namespace
}  // namespace qst
