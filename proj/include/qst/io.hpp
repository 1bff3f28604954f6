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
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "qst/errors.hpp"
#include "qst/linalg.hpp"
#include "qst/measurement.hpp"
#include "qst/optimizer.hpp"
#include "qst/state.hpp"

namespace qst {

/// Shortest round-trip text for a double; NaN prints as "nan".
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// {"rows": R, "cols": C, "entries": [[re, im], ...]} in row-major order.
inline nlohmann::json to_json(const ComplexMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const cplx& z : m.data()) entries.push_back({z.real(), z.imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& entries = j.at("entries");
  if (entries.size() != rows * cols) throw DimensionError("matrix json: entry count mismatch");
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].size() != 2) throw DimensionError("matrix json: entries must be [re, im]");
    m.data()[i] = cplx(entries[i][0].get<double>(), entries[i][1].get<double>());
  }
  return m;
}

inline FactorMatrix factor_from_json(const nlohmann::json& j) { return FactorMatrix(matrix_from_json(j)); }
inline DensityMatrix density_from_json(const nlohmann::json& j) { return DensityMatrix(matrix_from_json(j)); }

inline void write_shot_records_csv(std::ostream& os, std::span<const ShotRecord> records) {
  os << "k,j,count,M\n";
  for (const auto& rec : records)
    for (std::size_t j = 0; j < rec.counts.size(); ++j)
      os << rec.setting << ',' << j << ',' << rec.counts[j] << ',' << rec.shots << '\n';
}

inline void write_observables_csv(std::ostream& os, const ObservableVector& v) {
  os << "k,y,y_hat,e\n";
  for (std::size_t k = 0; k < v.y.size(); ++k) {
    os << k << ',' << format_double(v.y[k]) << ',' << format_double(v.y_hat[k]) << ','
       << format_double(v.e[k]) << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "iter,loss,grad_norm,dist_to_true,recovery_error\n";
  for (const auto& r : trace.records) {
    os << r.iter << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
       << format_double(r.dist_to_true) << ',' << format_double(r.recovery_error) << '\n';
  }
}

}  // namespace qst
