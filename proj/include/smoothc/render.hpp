// Copyright 2026 The smoothc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shader gallery, renders, error metrics and report emission.

#ifndef SMOOTHC_RENDER_HPP_
#define SMOOTHC_RENDER_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "smoothc/compile.hpp"
#include "smoothc/image.hpp"
#include "smoothc/ir.hpp"

namespace smoothc {

struct Shader {
  std::string name;
  std::string source;
  GraphPtr graph;  // three outputs r, g, b
  bool animated = false;
  bool tiling = false;
};

// The built-in gallery, in a fixed order.
const std::vector<Shader>& builtin_shaders();
// Throws std::invalid_argument for an unknown name.
const Shader& shader_by_name(std::string_view name);

inline constexpr int kGroundTruthSpp = 1000;
inline constexpr int kReportSize = 256;
inline constexpr int kTuneSize = 64;

PixelGrid make_grid(int width, int height, double t = 0.0, double spatial_sigma = 0.5);

// Per-pixel smoothed means (linear color).
Image render_image(const SmoothedProgram& p, int width, int height, double t = 0.0,
                   int workers = 1);

// Jittered supersampling of the direct program, spp in {2, 4, 8, 16, 32}.
Image msaa_render(const ProgramGraph& g, int width, int height, int spp, std::uint64_t seed,
                  double t = 0.0, int workers = 1);

// Root mean square over pixels and channels of the sRGB difference.
double l2_error_srgb(const Image& img, const Image& truth);

// One channel: per-pixel root mean square over channels of the sRGB
// difference.
Image error_heatmap(const Image& img, const Image& truth);

// Heatmap values mapped through a black-red-yellow-white ramp, scaled so
// `max_value` is white.
Image colorize_heatmap(const Image& heat, double max_value);

struct ErrorReport {
  double l2_srgb = 0.0;
  double runtime_ms = 0.0;
  double ratio = 0.0;  // runtime relative to the no-antialiasing variant
  Image heatmap;
};

// Metrics row of the CSV reports.
struct MetricsRow {
  std::string variant_id;
  double runtime_ms = 0.0;
  double ratio = 0.0;
  double l2_srgb = 0.0;
};

// "variant_id,runtime_ms,ratio,l2_srgb" header plus one line per row.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PlotSeries {
  std::string name;
  std::string color;  // any SVG color
  std::vector<PlotPoint> points;
  bool lines = true;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

// Standalone SVG line/scatter plot.
std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

// Time versus error plot: frontier, MSAA baselines and the no-antialiasing
// point.
std::string pareto_svg(const std::string& title, const std::vector<PlotPoint>& frontier,
                       const std::vector<PlotPoint>& msaa, PlotPoint no_aa);

// Writes text, creating parent directories.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace smoothc

#endif  // SMOOTHC_RENDER_HPP_
