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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qst/plot.hpp"

namespace qst {
namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

// Fixed input for the golden comparison.
std::vector<Series> golden_series() {
  return {{"n=4", {1, 4, 16, 64, 256}, {0.083, 0.084, 0.083, 0.085, 0.090}},
          {"n=4 r=2", {1, 4, 16, 64, 256}, {0.120, 0.122, 0.120, 0.125, 0.136}},
          {"with gap", {1, 4, 16, 64, 256}, {0.2, std::numeric_limits<double>::quiet_NaN(), 0.25, 0.3, 0.4}}};
}

AxesConfig golden_axes() {
  AxesConfig a;
  a.title = "Fixed budget <N=65536>";
  a.x_label = "M";
  a.y_label = "median recovery error";
  a.log_x = true;
  a.log_y = true;
  return a;
}

TEST(EmitPlot, SingleSeriesSinglePolyline) {
  const auto out = emit_plot({{"a", {0, 1}, {0, 1}}}, {});
  EXPECT_EQ(count(out.svg, "<polyline"), 1u);
  EXPECT_EQ(out.svg.rfind("<svg", 0), 0u);
  EXPECT_NE(out.svg.find("</svg>"), std::string::npos);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(EmitPlot, DecadeTicksOnLogAxis) {
  AxesConfig a;
  a.log_y = true;
  const auto out = emit_plot({{"a", {0, 1, 2}, {1e-6, 1e-3, 1.0}}}, a);
  for (const char* label : {">1e-6<", ">1e-5<", ">1e-4<", ">1e-3<", ">1e-2<", ">1e-1<", ">1<"}) {
    EXPECT_NE(out.svg.find(label), std::string::npos) << label;
  }
}

TEST(EmitPlot, NonFiniteAndNonPositivePointsDroppedWithWarnings) {
  AxesConfig a;
  a.log_y = true;
  const auto out = emit_plot({{"a", {0, 1, 2, 3}, {1.0, std::nan(""), -1.0, 0.5}}}, a);
  EXPECT_EQ(out.warnings.size(), 2u);
  EXPECT_EQ(count(out.svg, "<polyline"), 1u);
  const auto all_bad = emit_plot({{"a", {0}, {std::nan("")}}}, {});
  EXPECT_EQ(count(all_bad.svg, "<polyline"), 0u);
  EXPECT_FALSE(all_bad.warnings.empty());
}

TEST(EmitPlot, RejectsMalformedInput) {
  EXPECT_THROW(emit_plot({}, {}), DimensionError);
  EXPECT_THROW(emit_plot({{"a", {0, 1}, {0}}}, {}), DimensionError);
}

TEST(EmitPlot, EscapesText) {
  const auto out = emit_plot({{"a<b & c", {0, 1}, {0, 1}}}, golden_axes());
  EXPECT_NE(out.svg.find("a&lt;b &amp; c"), std::string::npos);
  EXPECT_EQ(out.svg.find("a<b"), std::string::npos);
}

TEST(EmitPlot, DeterministicBytes) {
  EXPECT_EQ(emit_plot(golden_series(), golden_axes()).svg, emit_plot(golden_series(), golden_axes()).svg);
}

TEST(EmitPlot, MatchesGoldenFile) {
  const std::filesystem::path golden = std::filesystem::path(QST_TEST_DATA_DIR) / "golden_plot.svg";
  const auto svg = emit_plot(golden_series(), golden_axes()).svg;
  if (std::getenv("QST_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << svg;
  }
  std::ifstream f(golden, std::ios::binary);
  ASSERT_TRUE(f) << "missing " << golden;
  std::ostringstream os;
  os << f.rdbuf();
  EXPECT_EQ(svg, os.str());
}

}  // namespace
}  // namespace qst
