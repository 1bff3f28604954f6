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

// The qst-lab command line: study subcommands, h-curve and plot.

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qst/diagnostics.hpp"
#include "qst/errors.hpp"
#include "qst/experiment.hpp"
#include "qst/io.hpp"
#include "qst/plot.hpp"

namespace qst {

namespace cli_detail {

template <class T>
T parse_number(const std::string& text, const char* flag) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError(std::string("invalid value '") + text + "' for --" + flag);
  }
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item, flag));
  if (out.empty()) throw ConfigError(std::string("empty list for --") + flag);
  return out;
}

struct StudyFlags {
  std::string config, n, r, K, M, N, mu, trials, seed, out;
};

// Only flags that apply to the kind are registered, so CLI11 rejects the rest.
inline void add_study_flags(CLI::App& sub, StudyFlags& f, StudyKind kind) {
  sub.add_option("--config", f.config, "JSON study config; flags override its values");
  sub.add_option("--n", f.n, "qubit counts, comma separated");
  sub.add_option("--r", f.r, "ranks, comma separated");
  if (!uses_budget(kind) && kind != StudyKind::variance) {
    sub.add_option("--K", f.K, "settings counts, comma separated");
  }
  sub.add_option("--M", f.M, "shots per setting, comma separated");
  if (uses_budget(kind)) sub.add_option("--N", f.N, "fixed budget N = K M; K is derived as N/M");
  if (kind != StudyKind::variance) sub.add_option("--mu", f.mu, "step size");
  sub.add_option("--trials", f.trials, "Monte Carlo trials per configuration");
  sub.add_option("--seed", f.seed, "master seed");
  sub.add_option("--out", f.out, "output root directory");
}

inline StudyConfig build_config(StudyKind kind, const StudyFlags& f) {
  StudyConfig c = StudyConfig::defaults(kind);
  if (!f.config.empty()) {
    c = load_config(f.config);
    if (c.kind != kind) {
      throw ConfigError("config kind '" + std::string(to_string(c.kind)) + "' does not match subcommand '" +
                        std::string(to_string(kind)) + "'");
    }
  }
  if (!f.n.empty()) c.qubits = parse_list<int>(f.n, "n");
  if (!f.r.empty()) c.ranks = parse_list<std::size_t>(f.r, "r");
  if (!f.K.empty()) {
    if (uses_budget(kind)) throw ConfigError("--K does not apply: K is derived as N/M; set --N instead");
    if (kind == StudyKind::variance) throw ConfigError("--K does not apply to the variance study");
    c.settings = parse_list<std::size_t>(f.K, "K");
  }
  if (!f.M.empty()) c.shots = parse_list<std::uint64_t>(f.M, "M");
  if (!f.N.empty()) {
    if (!uses_budget(kind)) throw ConfigError("--N applies only to tradeoff and compare-basis");
    c.budget = parse_number<std::uint64_t>(f.N, "N");
  }
  if (!f.mu.empty()) {
    if (kind == StudyKind::variance) throw ConfigError("--mu does not apply to the variance study");
    c.step = parse_number<double>(f.mu, "mu");
  }
  if (!f.trials.empty()) c.trials = parse_number<int>(f.trials, "trials");
  if (!f.seed.empty()) c.seed = parse_number<std::uint64_t>(f.seed, "seed");
  if (!f.out.empty()) c.output_dir = f.out;
  c.validate();
  return c;
}

inline int run_study_command(StudyKind kind, const StudyFlags& f, std::ostream& out, std::ostream& err) {
  const StudyConfig cfg = build_config(kind, f);
  const auto started = std::chrono::system_clock::now();
  const auto res = run_study(cfg);
  const auto finished = std::chrono::system_clock::now();
  const auto dir = write_study(res, cfg.output_dir, started, finished);
  for (const auto& w : res.warnings) err << "qst-lab: warning: " << w << '\n';
  out << dir.string() << '\n';
  return 0;
}

inline int run_h_curve(const std::string& out_root, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::system_clock::now();
  const auto dir = make_run_directory(out_root.empty() ? "results" : out_root, "h-curve",
                                      utc_timestamp(started, "%Y%m%dT%H%M%SZ"));
  Series s{"h(delta)", {}, {}};
  std::ostringstream csv;
  csv << "delta,h\n";
  for (int i = 0; i < 100; ++i) {
    const double d = 0.09 * i / 99.0;
    const double h = error_bound_h(d);
    s.x.push_back(d);
    s.y.push_back(h);
    csv << format_double(d) << ',' << format_double(h) << '\n';
  }
  write_text(dir / "results.csv", csv.str());
  AxesConfig axes;
  axes.title = "Error bound constant h(delta)";
  axes.x_label = "delta";
  axes.y_label = "h";
  const auto plot = emit_plot({s}, axes);
  for (const auto& w : plot.warnings) err << "qst-lab: warning: " << w << '\n';
  write_text(dir / "plot.svg", plot.svg);
  nlohmann::json m;
  m["tool"] = "qst-lab";
  m["version"] = kVersion;
  m["study"] = "h-curve";
  m["grid"] = {{"from", 0.0}, {"to", 0.09}, {"points", 100}};
  m["started"] = utc_timestamp(started, "%Y-%m-%dT%H:%M:%SZ");
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  out << dir.string() << '\n';
  return 0;
}

struct PlotFlags {
  std::string data, out, title, x_label, y_label;
  bool log_x = false, log_y = false;
};

// Reads "series,x,y" rows; the series name may be double-quoted.
inline std::vector<Series> read_plot_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open plot data " + path);
  std::string line;
  std::getline(in, line);
  if (line != "series,x,y") throw ConfigError("plot data must start with the header 'series,x,y'");
  std::vector<Series> series;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::string name;
    std::size_t pos = 0;
    if (line[0] == '"') {
      const auto close = line.find('"', 1);
      if (close == std::string::npos) throw ConfigError("unterminated quote on line " + std::to_string(lineno));
      name = line.substr(1, close - 1);
      pos = close + 1;
    } else {
      pos = line.find(',');
      name = line.substr(0, pos);
    }
    if (pos >= line.size() || line[pos] != ',') throw ConfigError("malformed row on line " + std::to_string(lineno));
    const auto comma = line.find(',', pos + 1);
    if (comma == std::string::npos) throw ConfigError("malformed row on line " + std::to_string(lineno));
    auto num = [&](const std::string& t) {
      if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
      return parse_number<double>(t, "data");
    };
    const double x = num(line.substr(pos + 1, comma - pos - 1));
    const double y = num(line.substr(comma + 1));
    auto it = std::find_if(series.begin(), series.end(), [&](const Series& s) { return s.name == name; });
    if (it == series.end()) {
      series.push_back({name, {}, {}});
      it = series.end() - 1;
    }
    it->x.push_back(x);
    it->y.push_back(y);
  }
  if (series.empty()) throw ConfigError("plot data has no rows");
  return series;
}

inline int run_plot(const PlotFlags& f, std::ostream& out, std::ostream& err) {
  AxesConfig axes;
  axes.title = f.title;
  axes.x_label = f.x_label;
  axes.y_label = f.y_label;
  axes.log_x = f.log_x;
  axes.log_y = f.log_y;
  const auto plot = emit_plot(read_plot_data(f.data), axes);
  for (const auto& w : plot.warnings) err << "qst-lab: warning: " << w << '\n';
  std::filesystem::path target(f.out);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  write_text(target, plot.svg);
  out << target.string() << '\n';
  return 0;
}

}  // namespace cli_detail

/// Exit status: 0 success, 1 runtime failure, 2 usage or configuration error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"qst-lab: Pauli-measurement quantum state tomography experiments", "qst-lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  struct StudyCommand {
    const char* name;
    StudyKind kind;
    const char* help;
    StudyFlags flags;
    CLI::App* app = nullptr;
  };
  std::vector<StudyCommand> studies{
      {"variance", StudyKind::variance, "MSE of empirical Pauli observables versus M", {}},
      {"converge", StudyKind::convergence, "Wirtinger gradient descent convergence traces", {}},
      {"tradeoff", StudyKind::tradeoff, "recovery error versus M at a fixed budget N = K M", {}},
      {"compare-constraint", StudyKind::constraint_compare, "plain versus Riemannian (unit norm) descent", {}},
      {"compare-basis", StudyKind::basis_vs_observable, "basis-probability versus observable recovery", {}},
      {"init-quality", StudyKind::init_quality, "spectral initialization error versus K", {}},
  };
  for (auto& s : studies) {
    s.app = app.add_subcommand(s.name, s.help);
    add_study_flags(*s.app, s.flags, s.kind);
  }
  std::string h_out;
  auto* h_curve = app.add_subcommand("h-curve", "tabulate the error-bound constant h(delta) on [0, 0.09]");
  h_curve->add_option("--out", h_out, "output root directory");
  PlotFlags pf;
  auto* plot = app.add_subcommand("plot", "render series,x,y CSV data as an SVG line plot");
  plot->add_option("--data", pf.data, "input CSV with header series,x,y")->required();
  plot->add_option("--out", pf.out, "output SVG path")->required();
  plot->add_option("--title", pf.title, "plot title");
  plot->add_option("--x-label", pf.x_label, "x axis label");
  plot->add_option("--y-label", pf.y_label, "y axis label");
  plot->add_flag("--log-x", pf.log_x, "log10 x axis");
  plot->add_flag("--log-y", pf.log_y, "log10 y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    if (e.get_name() != "RequiredError" || app.get_subcommands().empty()) {
      err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    } else {
      err << app.get_subcommands().front()->help();
    }
    return 2;
  }

  try {
    for (const auto& s : studies) {
      if (s.app->parsed()) return run_study_command(s.kind, s.flags, out, err);
    }
    if (h_curve->parsed()) return run_h_curve(h_out, out, err);
    if (plot->parsed()) return run_plot(pf, out, err);
  } catch (const ConfigError& e) {
    err << "qst-lab: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "qst-lab: failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace qst
