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

#include "smoothc/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "smoothc/oracle.hpp"

namespace smoothc {

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      a.channel_count() != b.channel_count() || a.channel_count() == 0) {
    throw std::invalid_argument("images differ in shape");
  }
}

// Round-trip safe formatting, independent of locale and stream state.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

PixelGrid make_grid(int width, int height, double t, double spatial_sigma) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  PixelGrid g;
  g.width = width;
  g.height = height;
  g.t = t;
  g.spatial_sigma = spatial_sigma;
  return g;
}

Image render_image(const SmoothedProgram& p, int width, int height, double t, int workers) {
  return evaluate_batch(p, make_grid(width, height, t), workers);
}

Image msaa_render(const ProgramGraph& g, int width, int height, int spp, std::uint64_t seed,
                  double t, int workers) {
  if (spp != 2 && spp != 4 && spp != 8 && spp != 16 && spp != 32) {
    throw std::invalid_argument("msaa spp must be one of 2, 4, 8, 16, 32");
  }
  return supersample_render(g, make_grid(width, height, t), spp, seed, workers);
}

double l2_error_srgb(const Image& img, const Image& truth) {
  require_same_shape(img, truth);
  const Image a = to_srgb(img);
  const Image b = to_srgb(truth);
  double sum = 0.0;
  for (int c = 0; c < a.channel_count(); ++c) sum += (a[c] - b[c]).square().sum();
  const double n = static_cast<double>(a.width()) * a.height() * a.channel_count();
  return std::sqrt(sum / n);
}

Image error_heatmap(const Image& img, const Image& truth) {
  require_same_shape(img, truth);
  const Image a = to_srgb(img);
  const Image b = to_srgb(truth);
  Image heat(a.width(), a.height(), 1);
  for (int c = 0; c < a.channel_count(); ++c) heat[0] += (a[c] - b[c]).square();
  heat[0] = (heat[0] / a.channel_count()).sqrt();
  return heat;
}

Image colorize_heatmap(const Image& heat, double max_value) {
  if (heat.channel_count() != 1) throw std::invalid_argument("heatmap must have one channel");
  if (!(max_value > 0.0)) throw std::invalid_argument("heatmap scale must be positive");
  Image out(heat.width(), heat.height(), 3);
  for (int r = 0; r < heat.height(); ++r) {
    for (int c = 0; c < heat.width(); ++c) {
      // Ramp in sRGB space, then stored linear so write_png reproduces it.
      const double v = std::clamp(heat[0](r, c) / max_value, 0.0, 1.0) * 3.0;
      const double red = std::min(v, 1.0);
      const double green = std::clamp(v - 1.0, 0.0, 1.0);
      const double blue = std::clamp(v - 2.0, 0.0, 1.0);
      out[0](r, c) = srgb_decode(red);
      out[1](r, c) = srgb_decode(green);
      out[2](r, c) = srgb_decode(blue);
    }
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string s = "variant_id,runtime_ms,ratio,l2_srgb\n";
  for (const MetricsRow& r : rows) {
    if (r.variant_id.find_first_of(",\"\n") != std::string::npos) {
      s += '"';
      for (char c : r.variant_id) {
        if (c == '"') s += '"';
        s += c;
      }
      s += '"';
    } else {
      s += r.variant_id;
    }
    s += ',' + fmt(r.runtime_ms) + ',' + fmt(r.ratio) + ',' + fmt(r.l2_srgb) + '\n';
  }
  return s;
}

std::string svg_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    for (const PlotPoint& p : s.points) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  x0 -= px, x1 += px;
  y0 = y0 >= 0.0 ? std::max(0.0, y0 - py) : y0 - py;
  y1 += py;

  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = spec.width - left - right, ph = spec.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
    << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << sx(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(xv) << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << sx(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt_short(xv) << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(yv) << "\" x2=\"" << left << "\" y2=\""
      << sy(yv) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\">"
      << fmt_short(yv) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << spec.height - 10
    << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(spec.y_label) << "</text>\n";

  int legend = 0;
  for (const PlotSeries& s : series) {
    const std::string color = xml_escape(s.color.empty() ? "black" : s.color);
    if (s.lines && s.points.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const PlotPoint& p : s.points) o << sx(p.x) << ',' << sy(p.y) << ' ';
      o << "\"/>\n";
    }
    if (s.markers) {
      for (const PlotPoint& p : s.points) {
        o << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
      }
    }
    const double ly = top + 10 + 18 * legend++;
    o << "<rect x=\"" << left + pw + 12 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" "
      << "fill=\"" << color << "\"/>\n";
    o << "<text x=\"" << left + pw + 28 << "\" y=\"" << ly + 1 << "\">" << xml_escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string pareto_svg(const std::string& title, const std::vector<PlotPoint>& frontier,
                       const std::vector<PlotPoint>& msaa, PlotPoint no_aa) {
  std::vector<PlotSeries> series;
  series.push_back({"smoothed", "#d62728", frontier, true, true});
  series.push_back({"MSAA", "#1f77b4", msaa, true, true});
  series.push_back({"no AA", "black", {no_aa}, false, true});
  return svg_plot({title, "runtime / no-AA runtime", "L2 error (sRGB)"}, series);
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace smoothc
