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

// Config-driven Monte Carlo studies: enumeration of configurations, seeding,
// a worker pool over (configuration, trial) jobs, aggregation and output.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qst/diagnostics.hpp"
#include "qst/errors.hpp"
#include "qst/io.hpp"
#include "qst/measurement.hpp"
#include "qst/objective.hpp"
#include "qst/optimizer.hpp"
#include "qst/plot.hpp"
#include "qst/rng.hpp"
#include "qst/state.hpp"
#include "qst/version.hpp"

namespace qst {

enum class StudyKind { variance, convergence, tradeoff, constraint_compare, basis_vs_observable, init_quality };

inline std::string_view to_string(StudyKind k) {
  switch (k) {
    case StudyKind::variance: return "variance";
    case StudyKind::convergence: return "convergence";
    case StudyKind::tradeoff: return "tradeoff";
    case StudyKind::constraint_compare: return "constraint-compare";
    case StudyKind::basis_vs_observable: return "basis-vs-observable";
    case StudyKind::init_quality: return "init-quality";
  }
  return "unknown";
}

inline StudyKind parse_study_kind(std::string_view s) {
  for (auto k : {StudyKind::variance, StudyKind::convergence, StudyKind::tradeoff, StudyKind::constraint_compare,
                 StudyKind::basis_vs_observable, StudyKind::init_quality}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown study kind '" + std::string(s) + "'");
}

/// Kinds whose settings count is derived as K = N / M from a fixed budget.
inline bool uses_budget(StudyKind k) {
  return k == StudyKind::tradeoff || k == StudyKind::basis_vs_observable;
}

struct StudyConfig {
  StudyKind kind = StudyKind::convergence;
  std::vector<int> qubits{4};
  std::vector<std::size_t> ranks{1};
  std::vector<std::size_t> settings{2000};  // K, ignored by budget kinds
  std::vector<std::uint64_t> shots{100};    // M
  std::uint64_t budget = 0;                 // N = K M, budget kinds only
  double step = 0.3;
  int trials = 20;
  int resamples = 1000;  // variance only
  std::uint64_t seed = 1;
  int iteration_cap = 3000;
  double gradient_tolerance = 1e-9;
  double delta = 0.09;
  std::string output_dir = "results";

  /// Per-kind defaults taken from the reference experiments.
  static StudyConfig defaults(StudyKind kind) {
    StudyConfig c;
    c.kind = kind;
    switch (kind) {
      case StudyKind::variance:
        c.qubits = {1, 3, 5, 7};
        c.ranks = {1};
        c.shots = {10, 100, 1000};
        c.trials = 100;
        break;
      case StudyKind::convergence:
        c.qubits = {4, 5, 6};
        c.ranks = {2};
        c.settings = {2000};
        c.shots = {100};
        c.step = 0.3;
        break;
      case StudyKind::tradeoff:
        c.qubits = {4};
        c.ranks = {1, 2};
        c.shots = {1, 4, 16, 64, 256};
        c.budget = 65536;
        c.step = 0.05;
        break;
      case StudyKind::constraint_compare:
        c.qubits = {5};
        c.ranks = {2};
        c.settings = {4000};
        c.shots = {50};
        c.step = 0.1;
        break;
      case StudyKind::basis_vs_observable:
        c.qubits = {4};
        c.ranks = {1, 2};
        c.shots = {1, 4, 16, 64, 256};
        c.budget = 65536;
        c.step = 0.3;
        break;
      case StudyKind::init_quality:
        c.qubits = {4};
        c.ranks = {1};
        c.settings = {200, 500, 1000, 2000, 5000};
        c.shots = {100};
        break;
    }
    return c;
  }

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (qubits.empty() || ranks.empty() || shots.empty()) throw ConfigError("qubits, rank and shots lists must be nonempty");
    for (int n : qubits) {
      if (n < 1 || n > kMaxDenseQubits) {
        throw ConfigError("qubit count " + std::to_string(n) + " outside 1.." + std::to_string(kMaxDenseQubits));
      }
      for (auto r : ranks) {
        if (r < 1 || r > (std::size_t{1} << n)) {
          throw ConfigError("rank " + std::to_string(r) + " outside 1..2^n for n=" + std::to_string(n));
        }
      }
    }
    for (auto m : shots) {
      if (m < 1) throw ConfigError("shots M must be >= 1");
    }
    if (uses_budget(kind)) {
      if (budget < 1) throw ConfigError(std::string(to_string(kind)) + " requires a budget N >= 1");
      for (auto m : shots) {
        if (budget % m != 0) {
          throw ConfigError("budget N=" + std::to_string(budget) + " is not divisible by M=" + std::to_string(m));
        }
      }
    } else if (kind != StudyKind::variance) {
      if (settings.empty()) throw ConfigError("settings list must be nonempty");
      for (auto k : settings) {
        if (k < 1) throw ConfigError("settings K must be >= 1");
      }
    }
    if (kind == StudyKind::variance && resamples < 1) throw ConfigError("resamples must be >= 1");
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("step size must be finite and > 0");
    if (iteration_cap < 0) throw ConfigError("iteration cap must be >= 0");
    if (!(gradient_tolerance >= 0.0)) throw ConfigError("gradient tolerance must be >= 0");
    try {
      error_bound_h(delta);
    } catch (const DomainError&) {
      throw ConfigError("delta outside the domain of h");
    }
  }
};

namespace detail {

template <class T>
std::vector<T> scalar_or_list(const nlohmann::json& v, const char* key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <class T>
T scalar(const nlohmann::json& v, const char* key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// Reads a config object. "kind" selects the defaults; every other key
/// overrides them. Unknown keys are rejected.
inline StudyConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("kind")) throw ConfigError("config is missing 'kind'");
  StudyConfig c = StudyConfig::defaults(parse_study_kind(detail::scalar<std::string>(j.at("kind"), "kind")));
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "kind") continue;
    else if (key == "qubits") c.qubits = detail::scalar_or_list<int>(v, k);
    else if (key == "rank") c.ranks = detail::scalar_or_list<std::size_t>(v, k);
    else if (key == "settings") c.settings = detail::scalar_or_list<std::size_t>(v, k);
    else if (key == "shots") c.shots = detail::scalar_or_list<std::uint64_t>(v, k);
    else if (key == "budget") c.budget = detail::scalar<std::uint64_t>(v, k);
    else if (key == "step-size") c.step = detail::scalar<double>(v, k);
    else if (key == "trials") c.trials = detail::scalar<int>(v, k);
    else if (key == "resamples") c.resamples = detail::scalar<int>(v, k);
    else if (key == "seed") c.seed = detail::scalar<std::uint64_t>(v, k);
    else if (key == "iteration-cap") c.iteration_cap = detail::scalar<int>(v, k);
    else if (key == "gradient-tolerance") c.gradient_tolerance = detail::scalar<double>(v, k);
    else if (key == "delta") c.delta = detail::scalar<double>(v, k);
    else if (key == "output-dir") c.output_dir = detail::scalar<std::string>(v, k);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

inline nlohmann::json to_json(const StudyConfig& c) {
  nlohmann::json j;
  j["kind"] = to_string(c.kind);
  j["qubits"] = c.qubits;
  j["rank"] = c.ranks;
  if (uses_budget(c.kind)) j["budget"] = c.budget;
  else if (c.kind != StudyKind::variance) j["settings"] = c.settings;
  j["shots"] = c.shots;
  if (c.kind != StudyKind::variance) j["step-size"] = c.step;
  j["trials"] = c.trials;
  if (c.kind == StudyKind::variance) j["resamples"] = c.resamples;
  j["seed"] = c.seed;
  j["iteration-cap"] = c.iteration_cap;
  j["gradient-tolerance"] = c.gradient_tolerance;
  j["delta"] = c.delta;
  j["output-dir"] = c.output_dir;
  return j;
}

inline StudyConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

/// seed = mix(mix(mix(mix(master ^ golden) ^ fnv1a(label)) ^ config) ^ trial),
/// with mix = splitmix64 finalizer and fnv1a the 64-bit FNV-1a hash.
inline std::uint64_t derive_trial_seed(std::uint64_t master, std::string_view label, std::uint64_t config,
                                       std::uint64_t trial) {
  std::uint64_t h = mix64(master ^ 0x9E3779B97F4A7C15ull);
  h = mix64(h ^ fnv1a(label));
  h = mix64(h ^ config);
  return mix64(h ^ trial);
}

struct Configuration {
  std::size_t index = 0;
  int n = 0;
  std::size_t r = 0;
  std::size_t K = 0;
  std::uint64_t M = 0;
  std::size_t pair = 0;  // index of the (n, r) combination; trials share states within it
};

inline std::vector<Configuration> enumerate_configurations(const StudyConfig& c) {
  std::vector<Configuration> out;
  std::size_t pair = 0;
  for (int n : c.qubits)
    for (auto r : c.ranks) {
      if (uses_budget(c.kind)) {
        for (auto m : c.shots) out.push_back({out.size(), n, r, static_cast<std::size_t>(c.budget / m), m, pair});
      } else if (c.kind == StudyKind::variance) {
        for (auto m : c.shots) out.push_back({out.size(), n, r, 1, m, pair});
      } else {
        for (auto k : c.settings)
          for (auto m : c.shots) out.push_back({out.size(), n, r, k, m, pair});
      }
      ++pair;
    }
  return out;
}

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialRow {
  std::string arm;
  std::size_t config = 0;
  int trial = 0;
  int n = 0;
  std::size_t r = 0;
  std::size_t K = 0;
  std::uint64_t M = 0;
  double mu = kNaN;
  std::uint64_t seed = 0;
  double final_loss = kNaN;
  double final_grad_norm = kNaN;
  double recovery_error = kNaN;
  double init_error = kNaN;
  int iterations = 0;
  std::string stop = "none";
  double op_error_norm = kNaN;
  double bound_rhs = kNaN;
  double mse = kNaN;

  double metric(std::string_view name) const {
    if (name == "recovery_error") return recovery_error;
    if (name == "final_loss") return final_loss;
    if (name == "init_error") return init_error;
    if (name == "iterations") return iterations;
    if (name == "bound_rhs") return bound_rhs;
    if (name == "mse") return mse;
    throw DomainError("unknown metric " + std::string(name));
  }
};

struct Stats {
  std::size_t count = 0;
  double mean = kNaN;
  double median = kNaN;
  double stderr_ = kNaN;
};

/// Mean, median and standard error (sample standard deviation / sqrt(count))
/// of the finite entries.
inline Stats summarize(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Stats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return s;
}

struct AggregateRow {
  std::size_t config = 0;
  std::string arm;
  std::string metric;
  Stats stats;
};

/// Statistics per (configuration, arm) for each metric. Groups without a
/// finite value are skipped and reported in `warnings`.
inline std::vector<AggregateRow> aggregate(const std::vector<TrialRow>& rows, const std::vector<std::string>& metrics,
                                           std::vector<std::string>& warnings) {
  std::vector<std::pair<std::size_t, std::string>> keys;
  for (const auto& r : rows) {
    std::pair<std::size_t, std::string> key{r.config, r.arm};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<AggregateRow> out;
  for (const auto& [config, arm] : keys) {
    for (const auto& metric : metrics) {
      std::vector<double> v;
      for (const auto& r : rows) {
        if (r.config == config && r.arm == arm) v.push_back(r.metric(metric));
      }
      Stats s = summarize(v);
      if (s.count == 0) {
        warnings.push_back("config " + std::to_string(config) + " arm " + arm + ": no finite " + metric +
                           " values, aggregate skipped");
        continue;
      }
      out.push_back({config, arm, metric, s});
    }
  }
  return out;
}

inline std::vector<std::string> study_metrics(StudyKind k) {
  switch (k) {
    case StudyKind::variance: return {"mse"};
    case StudyKind::init_quality: return {"init_error", "recovery_error"};
    case StudyKind::convergence: return {"recovery_error", "final_loss", "init_error", "iterations", "bound_rhs"};
    default: return {"recovery_error", "final_loss", "init_error", "iterations"};
  }
}

struct NamedTrace {
  std::size_t config = 0;
  int trial = 0;
  std::string arm;
  RunTrace trace;
};

struct TimingRow {
  std::size_t config = 0;
  int trial = 0;
  double wall_ms = 0.0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<Configuration> configurations;
  std::vector<TrialRow> rows;
  std::vector<AggregateRow> aggregates;
  std::vector<NamedTrace> traces;
  std::vector<TimingRow> timing;
  std::vector<std::string> warnings;
  unsigned threads = 1;

  /// Aggregate lookup; throws if absent.
  const Stats& stats(std::size_t config, std::string_view arm, std::string_view metric) const {
    for (const auto& a : aggregates) {
      if (a.config == config && a.arm == arm && a.metric == metric) return a.stats;
    }
    throw DomainError("no aggregate for config " + std::to_string(config) + " " + std::string(arm) + " " +
                      std::string(metric));
  }
};

/// QST_LAB_THREADS if set to a positive integer, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("QST_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

struct TrialOutput {
  std::vector<TrialRow> rows;
  std::vector<NamedTrace> traces;
  double wall_ms = 0.0;
};

inline FactorMatrix unit_normalized(const FactorMatrix& u) {
  const double nrm = u.matrix().frobenius_norm();
  if (!(nrm > 0.0)) throw NumericalError("spectral initialization returned a zero factor", nrm);
  return FactorMatrix(u.matrix() * (1.0 / nrm));
}

inline void fill_run(TrialRow& row, const RunTrace& tr, const FactorMatrix& truth) {
  row.final_loss = tr.final_loss;
  row.final_grad_norm = tr.final_grad_norm;
  row.recovery_error = recovery_error(tr.final_factor, truth);
  row.iterations = tr.iterations;
  row.stop = std::string(to_string(tr.stop));
}

inline TrialOutput run_trial(const StudyConfig& cfg, const Configuration& conf, int trial) {
  const auto label = to_string(cfg.kind);
  const std::uint64_t state_seed = derive_trial_seed(cfg.seed, std::string(label) + "/state", conf.pair, trial);
  const std::uint64_t data_seed = derive_trial_seed(cfg.seed, label, conf.index, trial);
  Rng state_rng(state_seed);
  Rng rng(data_seed);

  TrialOutput out;
  TrialRow base;
  base.config = conf.index;
  base.trial = trial;
  base.n = conf.n;
  base.r = conf.r;
  base.K = conf.K;
  base.M = conf.M;
  base.seed = data_seed;
  if (cfg.kind != StudyKind::variance) base.mu = cfg.step;

  const auto truth = random_low_rank_state(conf.n, conf.r, state_rng);

  if (cfg.kind == StudyKind::variance) {
    const auto setting = build_setting(random_pauli_strings(conf.n, 1, rng)[0]);
    const auto p = povm_probabilities(setting, truth.factor);
    const double y = signed_sum(setting, p);
    double sq = 0.0;
    for (int s = 0; s < cfg.resamples; ++s) {
      const double e = empirical_observable(sample_counts(p, conf.M, rng), setting) - y;
      sq += e * e;
    }
    TrialRow row = base;
    row.arm = "observable";
    row.mse = sq / cfg.resamples;
    out.rows.push_back(std::move(row));
    return out;
  }

  auto strings = random_pauli_strings(conf.n, conf.K, rng);
  const auto meas = measure_ensemble(strings, truth.factor, conf.M, rng);
  const SensingProblem problem(strings, meas.observables.y_hat);
  const FactorMatrix u0 = spectral_init(problem, conf.r);
  base.init_error = dist(u0, truth.factor);

  OptimizerConfig oc;
  oc.step = cfg.step;
  oc.max_iterations = cfg.iteration_cap;
  oc.gradient_tolerance = cfg.gradient_tolerance;

  switch (cfg.kind) {
    case StudyKind::init_quality: {
      TrialRow row = base;
      row.arm = "spectral";
      row.recovery_error = recovery_error(u0, truth.factor);
      row.final_loss = loss_value(problem, u0);
      out.rows.push_back(std::move(row));
      break;
    }
    case StudyKind::convergence:
    case StudyKind::tradeoff: {
      const bool traced = cfg.kind == StudyKind::convergence;
      oc.record_trajectory = traced;
      auto tr = gd_run(problem, u0, oc, traced ? std::optional<FactorMatrix>(truth.factor) : std::nullopt);
      TrialRow row = base;
      row.arm = "plain";
      fill_run(row, tr, truth.factor);
      if (traced) {
        row.op_error_norm = operator_error_norm(strings, meas.observables.e);
        row.bound_rhs = theorem_bound_rhs(cfg.delta, conf.r, strings, meas.observables.e);
        out.traces.push_back({conf.index, trial, "plain", std::move(tr)});
      }
      out.rows.push_back(std::move(row));
      break;
    }
    case StudyKind::constraint_compare: {
      oc.record_trajectory = true;
      auto plain = gd_run(problem, u0, oc, truth.factor);
      auto sphere = riemannian_run(problem, unit_normalized(u0), oc, truth.factor);
      TrialRow a = base, b = base;
      a.arm = "plain";
      fill_run(a, plain, truth.factor);
      b.arm = "riemannian";
      fill_run(b, sphere, truth.factor);
      out.rows.push_back(std::move(a));
      out.rows.push_back(std::move(b));
      out.traces.push_back({conf.index, trial, "plain", std::move(plain)});
      out.traces.push_back({conf.index, trial, "riemannian", std::move(sphere)});
      break;
    }
    case StudyKind::basis_vs_observable: {
      // Both arms consume the same shot records: the observable arm is the
      // signed post-processing of the basis outcomes.
      const auto basis = BasisProblem::from_records(strings, meas.records);
      const auto obs_run = gd_run(problem, u0, oc);
      const auto basis_run = gd_run(basis, u0, oc);
      TrialRow a = base, b = base;
      a.arm = "observable";
      fill_run(a, obs_run, truth.factor);
      b.arm = "basis";
      fill_run(b, basis_run, truth.factor);
      out.rows.push_back(std::move(a));
      out.rows.push_back(std::move(b));
      break;
    }
    case StudyKind::variance: break;
  }
  return out;
}

}  // namespace detail

struct StudyOptions {
  unsigned threads = 0;  // 0 = worker_count()
  bool keep_traces = true;
};

/// Runs every (configuration, trial) job on a worker pool; rows come back
/// sorted by (configuration, trial, arm) regardless of scheduling.
inline StudyResult run_study(const StudyConfig& cfg, StudyOptions opts = {}) {
  cfg.validate();
  StudyResult res;
  res.config = cfg;
  res.configurations = enumerate_configurations(cfg);
  const std::size_t jobs = res.configurations.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<detail::TrialOutput> outputs(jobs);
  const unsigned threads =
      static_cast<unsigned>(std::min<std::size_t>(opts.threads ? opts.threads : worker_count(), std::max<std::size_t>(jobs, 1)));
  res.threads = threads;

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const auto& conf = res.configurations[job / cfg.trials];
      const int trial = static_cast<int>(job % cfg.trials);
      try {
        const auto t0 = std::chrono::steady_clock::now();
        outputs[job] = detail::run_trial(cfg, conf, trial);
        outputs[job].wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t job = 0; job < jobs; ++job) {
    auto& o = outputs[job];
    res.timing.push_back({res.configurations[job / cfg.trials].index, static_cast<int>(job % cfg.trials), o.wall_ms});
    for (auto& r : o.rows) res.rows.push_back(std::move(r));
    if (opts.keep_traces) {
      for (auto& t : o.traces) res.traces.push_back(std::move(t));
    }
  }
  res.aggregates = aggregate(res.rows, study_metrics(cfg.kind), res.warnings);
  return res;
}

/// Median of a per-iteration quantity across traces; a trace that stopped
/// early contributes its final value.
inline std::vector<std::pair<int, double>> median_trajectory(const std::vector<const RunTrace*>& traces,
                                                             double TraceRecord::*field) {
  std::set<int> grid;
  for (const auto* t : traces)
    for (const auto& r : t->records) grid.insert(r.iter);
  std::vector<std::pair<int, double>> out;
  std::vector<std::size_t> cursor(traces.size(), 0);
  for (int it : grid) {
    std::vector<double> v;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& recs = traces[i]->records;
      if (recs.empty()) continue;
      while (cursor[i] + 1 < recs.size() && recs[cursor[i] + 1].iter <= it) ++cursor[i];
      v.push_back(recs[cursor[i]].*field);
    }
    out.emplace_back(it, summarize(v).median);
  }
  return out;
}

namespace detail {

inline std::string config_label(const StudyConfig& cfg, const Configuration& c) {
  std::string s;
  auto add = [&](const std::string& part) { s += (s.empty() ? "" : " ") + part; };
  if (cfg.qubits.size() > 1) add("n=" + std::to_string(c.n));
  if (cfg.ranks.size() > 1) add("r=" + std::to_string(c.r));
  if (!uses_budget(cfg.kind) && cfg.kind != StudyKind::variance && cfg.settings.size() > 1) add("K=" + std::to_string(c.K));
  if (cfg.shots.size() > 1 && cfg.kind != StudyKind::variance && !uses_budget(cfg.kind)) add("M=" + std::to_string(c.M));
  if (s.empty()) s = "n=" + std::to_string(c.n) + " r=" + std::to_string(c.r);
  return s;
}

// Pair-level label for kinds that plot against M or K.
inline std::string pair_label(const StudyConfig& cfg, const Configuration& c) {
  std::string s = "n=" + std::to_string(c.n) + " r=" + std::to_string(c.r);
  if (cfg.kind == StudyKind::init_quality && cfg.shots.size() > 1) s += " M=" + std::to_string(c.M);
  return s;
}

}  // namespace detail

/// Series and axes for the study's summary plot.
inline std::pair<std::vector<Series>, AxesConfig> study_plot(const StudyResult& res) {
  const auto& cfg = res.config;
  std::vector<Series> series;
  AxesConfig axes;
  axes.log_y = true;
  auto series_for = [&](const std::string& name) -> Series& {
    for (auto& s : series) {
      if (s.name == name) return s;
    }
    series.push_back({name, {}, {}});
    return series.back();
  };
  switch (cfg.kind) {
    case StudyKind::variance:
      axes.title = "Empirical observable MSE";
      axes.x_label = "M";
      axes.y_label = "mean squared error";
      axes.log_x = true;
      for (const auto& c : res.configurations) {
        auto& s = series_for("n=" + std::to_string(c.n));
        s.x.push_back(static_cast<double>(c.M));
        s.y.push_back(res.stats(c.index, "observable", "mse").mean);
      }
      break;
    case StudyKind::convergence:
    case StudyKind::constraint_compare: {
      axes.title = cfg.kind == StudyKind::convergence ? "Wirtinger gradient descent" : "Plain vs Riemannian descent";
      axes.x_label = "iteration";
      axes.y_label = "median recovery error";
      for (const auto& c : res.configurations) {
        for (const std::string arm : {"plain", "riemannian"}) {
          std::vector<const RunTrace*> tr;
          for (const auto& t : res.traces) {
            if (t.config == c.index && t.arm == arm) tr.push_back(&t.trace);
          }
          if (tr.empty()) continue;
          std::string name = detail::config_label(cfg, c);
          if (cfg.kind == StudyKind::constraint_compare) name = (res.configurations.size() > 1 ? name + " " : "") + arm;
          auto& s = series_for(name);
          for (const auto& [it, v] : median_trajectory(tr, &TraceRecord::recovery_error)) {
            s.x.push_back(it);
            s.y.push_back(v);
          }
        }
      }
      break;
    }
    case StudyKind::tradeoff:
    case StudyKind::basis_vs_observable:
      axes.title = "Fixed budget N=" + std::to_string(cfg.budget);
      axes.x_label = "M (K = N/M)";
      axes.y_label = "median recovery error";
      axes.log_x = true;
      for (const auto& c : res.configurations) {
        for (const std::string arm : {"plain", "observable", "basis"}) {
          bool present = false;
          for (const auto& a : res.aggregates) present |= a.config == c.index && a.arm == arm;
          if (!present) continue;
          std::string name = detail::pair_label(cfg, c);
          if (cfg.kind == StudyKind::basis_vs_observable) name += " " + arm;
          auto& s = series_for(name);
          s.x.push_back(static_cast<double>(c.M));
          s.y.push_back(res.stats(c.index, arm, "recovery_error").median);
        }
      }
      break;
    case StudyKind::init_quality:
      axes.title = "Spectral initialization";
      axes.x_label = "K";
      axes.y_label = "median dist(U0, U*)";
      axes.log_x = true;
      for (const auto& c : res.configurations) {
        auto& s = series_for(detail::pair_label(cfg, c));
        s.x.push_back(static_cast<double>(c.K));
        s.y.push_back(res.stats(c.index, "spectral", "init_error").median);
      }
      break;
  }
  return {std::move(series), std::move(axes)};
}

inline void write_results_csv(std::ostream& os, const StudyResult& res) {
  os << "kind,arm,config,trial,n,r,K,M,N,mu,seed,final_loss,final_grad_norm,recovery_error,init_error,"
        "iterations,stop,op_error_norm,bound_rhs,mse\n";
  const auto kind = to_string(res.config.kind);
  for (const auto& r : res.rows) {
    os << kind << ',' << r.arm << ',' << r.config << ',' << r.trial << ',' << r.n << ',' << r.r << ',' << r.K << ','
       << r.M << ',' << r.K * r.M << ',' << format_double(r.mu) << ',' << r.seed << ','
       << format_double(r.final_loss) << ',' << format_double(r.final_grad_norm) << ','
       << format_double(r.recovery_error) << ',' << format_double(r.init_error) << ',' << r.iterations << ','
       << r.stop << ',' << format_double(r.op_error_norm) << ',' << format_double(r.bound_rhs) << ','
       << format_double(r.mse) << '\n';
  }
}

inline void write_summary_csv(std::ostream& os, const StudyResult& res) {
  os << "kind,arm,config,n,r,K,M,N,metric,count,mean,median,stderr\n";
  for (const auto& a : res.aggregates) {
    const auto& c = res.configurations.at(a.config);
    os << to_string(res.config.kind) << ',' << a.arm << ',' << a.config << ',' << c.n << ',' << c.r << ',' << c.K
       << ',' << c.M << ',' << c.K * c.M << ',' << a.metric << ',' << a.stats.count << ','
       << format_double(a.stats.mean) << ',' << format_double(a.stats.median) << ','
       << format_double(a.stats.stderr_) << '\n';
  }
}

inline void write_plot_data_csv(std::ostream& os, const std::vector<Series>& series) {
  os << "series,x,y\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << '"' << s.name << "\"," << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t, const char* format) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::strftime(buf, sizeof buf, format, &tm);
  return buf;
}

/// Creates `<root>/<name>-<stamp>`, adding a numeric suffix if it exists.
inline std::filesystem::path make_run_directory(const std::filesystem::path& root, const std::string& name,
                                                const std::string& stamp) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  fs::path dir = root / (name + "-" + stamp);
  for (int i = 2; fs::exists(dir); ++i) dir = root / (name + "-" + stamp + "-" + std::to_string(i));
  fs::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + p.string());
  f << text;
}

/// Writes results.csv, summary.csv, timing.csv, plot.svg, plot-data.csv,
/// manifest.json and traces/ under a fresh directory; returns its path.
inline std::filesystem::path write_study(const StudyResult& res, const std::filesystem::path& root,
                                         std::chrono::system_clock::time_point started,
                                         std::chrono::system_clock::time_point finished) {
  namespace fs = std::filesystem;
  const fs::path dir = make_run_directory(root, std::string(to_string(res.config.kind)),
                                          utc_timestamp(started, "%Y%m%dT%H%M%SZ"));
  {
    std::ostringstream os;
    write_results_csv(os, res);
    write_text(dir / "results.csv", os.str());
  }
  {
    std::ostringstream os;
    write_summary_csv(os, res);
    write_text(dir / "summary.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "config,trial,wall_ms\n";
    for (const auto& t : res.timing) os << t.config << ',' << t.trial << ',' << format_double(t.wall_ms) << '\n';
    write_text(dir / "timing.csv", os.str());
  }
  std::vector<std::string> warnings = res.warnings;
  {
    auto [series, axes] = study_plot(res);
    auto plot = emit_plot(series, axes);
    for (auto& w : plot.warnings) warnings.push_back("plot: " + w);
    write_text(dir / "plot.svg", plot.svg);
    std::ostringstream os;
    write_plot_data_csv(os, series);
    write_text(dir / "plot-data.csv", os.str());
  }
  if (!res.traces.empty()) {
    fs::create_directories(dir / "traces");
    for (const auto& t : res.traces) {
      std::ostringstream os;
      write_trace_csv(os, t.trace);
      write_text(dir / "traces" /
                     ("config" + std::to_string(t.config) + "-" + t.arm + "-trial" + std::to_string(t.trial) + ".csv"),
                 os.str());
    }
  }
  nlohmann::json m;
  m["tool"] = "qst-lab";
  m["version"] = kVersion;
  m["study"] = to_string(res.config.kind);
  m["config"] = to_json(res.config);
  nlohmann::json confs = nlohmann::json::array();
  for (const auto& c : res.configurations) {
    confs.push_back({{"index", c.index}, {"n", c.n}, {"r", c.r}, {"K", c.K}, {"M", c.M}, {"N", c.K * c.M}});
  }
  m["configurations"] = confs;
  m["rows"] = res.rows.size();
  m["threads"] = res.threads;
  m["started"] = utc_timestamp(started, "%Y-%m-%dT%H:%M:%SZ");
  m["finished"] = utc_timestamp(finished, "%Y-%m-%dT%H:%M:%SZ");
  m["seed-derivation"] =
      "seed = mix(mix(mix(mix(master ^ 0x9E3779B97F4A7C15) ^ fnv1a(label)) ^ config) ^ trial); "
      "data streams use label = study kind, ground-truth states use label = kind + \"/state\" with the "
      "(n, r) pair index in place of the configuration";
  if (uses_budget(res.config.kind)) {
    m["notes"] = {"budget N is a desk-scale choice; the reference figures do not state their N values"};
  }
  m["warnings"] = warnings;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return dir;
}

}  // namespace qst
