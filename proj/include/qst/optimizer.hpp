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
#include <concepts>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/measurement.hpp"
#include "qst/objective.hpp"
#include "qst/state.hpp"

namespace qst {

template <class P>
concept Objective = requires(const P& p, const FactorMatrix& u) {
  { p.evaluate(u, true) } -> std::same_as<LossGradient>;
  { p.dim() } -> std::convertible_to<std::size_t>;
};

enum class Variant { plain, riemannian };

struct OptimizerConfig {
  double step = 0.3;
  int max_iterations = 3000;
  double gradient_tolerance = 1e-9;
  Variant variant = Variant::plain;
  bool record_trajectory = false;

  void validate() const {
    if (!(step >= 0.0) || !std::isfinite(step)) throw ConfigError("step size must be finite and >= 0");
    if (max_iterations < 0) throw ConfigError("iteration cap must be >= 0");
    if (!(gradient_tolerance >= 0.0)) throw ConfigError("gradient tolerance must be >= 0");
  }
};

enum class StopReason { converged, iteration_cap, diverged };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::iteration_cap: return "iteration_cap";
    case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

struct TraceRecord {
  int iter = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double dist_to_true = std::numeric_limits<double>::quiet_NaN();
  double recovery_error = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
  std::vector<TraceRecord> records;
  FactorMatrix final_factor;
  int iterations = 0;
  StopReason stop = StopReason::iteration_cap;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
};

/// Every iteration up to 1000, then every 10th.
inline bool keep_record(int iter) { return iter <= 1000 || iter % 10 == 0; }

/// V - <U, V> U, the projection onto the tangent space of the unit sphere at U.
inline ComplexMatrix project_tangent(const ComplexMatrix& u, const ComplexMatrix& v) {
  ComplexMatrix out = v;
  out.axpy(-inner(u, v), u);
  return out;
}

namespace detail {

template <Objective P>
RunTrace descend(const P& problem, FactorMatrix u, const OptimizerConfig& cfg,
                 const std::optional<FactorMatrix>& truth) {
  cfg.validate();
  if (u.dim() != problem.dim()) throw DimensionError("gradient descent: factor has wrong row count");
  const bool sphere = cfg.variant == Variant::riemannian;
  if (sphere && std::abs(u.matrix().frobenius_norm() - 1.0) > 1e-10) {
    throw DomainError("riemannian_run: initial factor must have unit Frobenius norm");
  }
  std::optional<DensityMatrix> rho;
  if (truth) {
    if (truth->dim() != u.dim() || truth->rank() != u.rank()) {
      throw DimensionError("gradient descent: ground truth shape mismatch");
    }
    rho.emplace(truth->gram());
  }

  RunTrace trace;
  LossGradient cur = problem.evaluate(u, true);
  if (sphere) cur.gradient = project_tangent(u.matrix(), cur.gradient);
  const double initial_loss = cur.loss;
  const double blowup = 1e6 * std::max(initial_loss, std::numeric_limits<double>::min());

  auto record = [&](int iter) {
    TraceRecord rec{iter, cur.loss, cur.gradient.frobenius_norm()};
    if (truth) {
      rec.dist_to_true = dist(u, *truth);
      rec.recovery_error = recovery_error(u, *rho);
    }
    trace.records.push_back(rec);
  };

  int iter = 0;
  for (;; ++iter) {
    const double gnorm = cur.gradient.frobenius_norm();
    if (!std::isfinite(cur.loss) || cur.loss > blowup) {
      trace.stop = StopReason::diverged;
      break;
    }
    if (gnorm <= cfg.gradient_tolerance) {
      trace.stop = StopReason::converged;
      break;
    }
    if (iter >= cfg.max_iterations) {
      trace.stop = StopReason::iteration_cap;
      break;
    }
    if (cfg.record_trajectory && keep_record(iter)) record(iter);

    ComplexMatrix next = u.matrix();
    next.axpy(-cfg.step, cur.gradient);
    if (sphere) {
      const double nrm = next.frobenius_norm();
      if (nrm < 1e-14) throw NumericalError("riemannian_run: degenerate step", nrm);
      next *= 1.0 / nrm;
    }
    u = FactorMatrix(std::move(next));
    cur = problem.evaluate(u, true);
    if (sphere) cur.gradient = project_tangent(u.matrix(), cur.gradient);
  }
  if (cfg.record_trajectory) record(iter);
  trace.iterations = iter;
  trace.final_loss = cur.loss;
  trace.final_grad_norm = cur.gradient.frobenius_norm();
  trace.final_factor = std::move(u);
  return trace;
}

}  // namespace detail

/// Wirtinger gradient descent U_t = U_{t-1} - mu * grad_{U*} f(U_{t-1}).
template <Objective P>
RunTrace gd_run(const P& problem, const FactorMatrix& u0, OptimizerConfig cfg,
                const std::optional<FactorMatrix>& truth = std::nullopt) {
  cfg.variant = Variant::plain;
  return detail::descend(problem, u0, cfg, truth);
}

/// Descent on the unit sphere ||U||_F = 1: step along the tangent-projected
/// gradient, then renormalize. `u0` must have unit norm.
template <Objective P>
RunTrace riemannian_run(const P& problem, const FactorMatrix& u0, OptimizerConfig cfg,
                        const std::optional<FactorMatrix>& truth = std::nullopt) {
  cfg.variant = Variant::riemannian;
  return detail::descend(problem, u0, cfg, truth);
}

/// One Riemannian step from unit-norm U.
template <Objective P>
FactorMatrix riemannian_step(const P& problem, const FactorMatrix& u, double step) {
  const auto lg = problem.evaluate(u, true);
  ComplexMatrix next = u.matrix();
  next.axpy(-step, project_tangent(u.matrix(), lg.gradient));
  const double nrm = next.frobenius_norm();
  if (nrm < 1e-14) throw NumericalError("riemannian_step: degenerate step", nrm);
  next *= 1.0 / nrm;
  return FactorMatrix(std::move(next));
}

/// Top-r eigenpairs of (D/K) sum_k y_hat_k W_k, scaled by sqrt of the
/// clipped eigenvalues.
inline FactorMatrix spectral_init(const SensingProblem& p, std::size_t rank) {
  if (rank < 1 || rank > p.dim()) throw DomainError("spectral_init: rank must be in 1..D");
  const PauliSum sum(p.settings(), p.y_hat());
  ComplexMatrix s = sum.dense();
  s *= p.scale();
  const auto eig = hermitian_eig(s);
  ComplexMatrix u(p.dim(), rank);
  for (std::size_t c = 0; c < rank; ++c) {
    const double w = std::sqrt(std::max(eig.eigenvalues[c], 0.0));
    for (std::size_t i = 0; i < p.dim(); ++i) u(i, c) = w * eig.eigenvectors(i, c);
  }
  return FactorMatrix(std::move(u));
}

}  // namespace qst
