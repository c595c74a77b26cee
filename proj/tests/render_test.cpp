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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "smoothc/oracle.hpp"

namespace smoothc {
namespace {

SmoothedProgram uniform(const Shader& s, RuleTag tag) {
  return compile(s.graph, RuleAssignment::uniform(*s.graph, tag));
}

TEST(Shaders, CheckerboardWhiteCellCenter) {
  const Shader& s = shader_by_name("checkerboard");
  // Pixel (col 1, row 2) has center (1.5, 2.5), inside a white cell.
  const Image img = render_image(uniform(s, RuleTag::none()), 4, 4);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(img[c](2, 1), 1.0);
  const std::vector<double> out = evaluate_outputs(*s.graph, std::array{1.5, 2.5});
  EXPECT_EQ(out, (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Shaders, GalleryShape) {
  const auto& all = builtin_shaders();
  ASSERT_GE(all.size(), 5u);
  int tiling = 0, animated = 0, uses_fract = 0;
  for (const Shader& s : all) {
    EXPECT_EQ(s.graph->outputs().size(), 3u) << s.name;
    bool has_x = false, has_y = false, has_t = false;
    for (const InputVar& v : s.graph->inputs()) {
      has_x |= v.name == "x";
      has_y |= v.name == "y";
      has_t |= v.name == "t";
    }
    EXPECT_TRUE(has_x && has_y) << s.name;
    EXPECT_EQ(has_t, s.animated) << s.name;
    bool fract = false;
    for (NodeId i = 0; i < static_cast<NodeId>(s.graph->size()); ++i) {
      fract |= s.graph->node(i).op == Op::kFract;
    }
    EXPECT_EQ(fract, s.tiling) << s.name;
    tiling += s.tiling;
    animated += s.animated;
    uses_fract += fract;
  }
  EXPECT_GE(uses_fract, 3);
  EXPECT_GE(animated, 1);
  EXPECT_EQ(&shader_by_name("bricks"), &all[2]);
  EXPECT_THROW(shader_by_name("nope"), std::invalid_argument);
}

TEST(Shaders, RenderAt256WithEveryUniformRule) {
  for (const Shader& s : builtin_shaders()) {
    for (RuleTag tag : {RuleTag::none(), RuleTag::adaptive(), RuleTag::dorn()}) {
      const Image img = render_image(uniform(s, tag), kReportSize, kReportSize, 0.3);
      ASSERT_EQ(img.width(), kReportSize);
      ASSERT_EQ(img.channel_count(), 3);
      for (int c = 0; c < 3; ++c) EXPECT_TRUE(img[c].isFinite().all()) << s.name;
    }
  }
}

TEST(Render, ConstantShaderIsFlat) {
  const GraphPtr g = parse_shared("out r = 0.25\nout g = 0.5 + 0.0 * x\nout b = 0.0 * y + 1.0\n");
  const Image img = render_image(compile(g, RuleAssignment::uniform(*g, RuleTag::adaptive())), 7, 5);
  EXPECT_TRUE((img[0] == 0.25).all());
  EXPECT_TRUE((img[1] == 0.5).all());
  EXPECT_TRUE((img[2] == 1.0).all());
}

TEST(Render, OneByOneIsSingleEvaluate) {
  const Shader& s = shader_by_name("circles");
  const SmoothedProgram p = uniform(s, RuleTag::adaptive());
  const Image img = render_image(p, 1, 1);
  const std::vector<double> v = p.evaluate(pixel_inputs(*s.graph, make_grid(1, 1), 0, 0), 0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(img[c](0, 0), v[c]);
}

TEST(Msaa, SppValidationAndDeterminism) {
  const Shader& s = shader_by_name("zigzag");
  EXPECT_THROW(msaa_render(*s.graph, 8, 8, 3, 1), std::invalid_argument);
  EXPECT_THROW(msaa_render(*s.graph, 8, 8, 64, 1), std::invalid_argument);
  EXPECT_EQ(msaa_render(*s.graph, 16, 16, 8, 9), msaa_render(*s.graph, 16, 16, 8, 9, 0.0, 4));
}

TEST(Msaa, MatchesAllMonteCarloProgram) {
  const Shader& s = shader_by_name("bricks");
  CompileOptions opts;
  opts.seed = 11;
  const SmoothedProgram p =
      compile(s.graph, RuleAssignment::uniform(*s.graph, RuleTag::mc(4)), opts);
  const Image a = msaa_render(*s.graph, 16, 16, 4, 11);
  const Image b = render_image(p, 16, 16);
  for (int c = 0; c < 3; ++c) EXPECT_LT((a[c] - b[c]).abs().maxCoeff(), 1e-12);
}

TEST(Msaa, MoreSamplesLowerError) {
  for (const Shader& s : builtin_shaders()) {
    const Image truth = supersample_render(*s.graph, make_grid(32, 32), 400, 5);
    const double e2 = l2_error_srgb(msaa_render(*s.graph, 32, 32, 2, 1), truth);
    const double e32 = l2_error_srgb(msaa_render(*s.graph, 32, 32, 32, 1), truth);
    EXPECT_LE(e32, e2) << s.name;
  }
}

TEST(Metrics, L2Examples) {
  const Image black(3, 2, 3, 0.0), white(3, 2, 3, 1.0);
  EXPECT_EQ(l2_error_srgb(black, black), 0.0);
  EXPECT_DOUBLE_EQ(l2_error_srgb(black, white), 1.0);
  EXPECT_THROW(l2_error_srgb(black, Image(2, 3, 3)), std::invalid_argument);
  EXPECT_THROW(l2_error_srgb(black, Image(3, 2, 1)), std::invalid_argument);
}

TEST(Metrics, HeatmapOnCraftedPair) {
  Image a(2, 2, 3, 0.0), b(2, 2, 3, 0.0);
  a[0](0, 0) = 1.0;                  // one channel full scale
  a[0](0, 1) = a[1](0, 1) = a[2](0, 1) = 1.0;
  b[1](1, 0) = srgb_decode(0.5);     // half scale in sRGB
  const Image h = error_heatmap(a, b);
  ASSERT_EQ(h.channel_count(), 1);
  EXPECT_NEAR(h[0](0, 0), std::sqrt(1.0 / 3.0), 1e-12);
  EXPECT_NEAR(h[0](0, 1), 1.0, 1e-12);
  EXPECT_NEAR(h[0](1, 0), std::sqrt(0.25 / 3.0), 1e-12);
  EXPECT_EQ(h[0](1, 1), 0.0);
  // The image-level L2 is the root mean square of the heatmap.
  EXPECT_NEAR(l2_error_srgb(a, b), std::sqrt(h[0].square().mean()), 1e-12);

  const Image rgb = colorize_heatmap(h, 1.0);
  EXPECT_NEAR(srgb_encode(rgb[0](0, 1)), 1.0, 1e-12);
  EXPECT_NEAR(srgb_encode(rgb[2](0, 1)), 1.0, 1e-12);
  EXPECT_EQ(rgb[0](1, 1), 0.0);
  EXPECT_THROW(colorize_heatmap(h, 0.0), std::invalid_argument);
}

TEST(Metrics, SrgbRoundTrip) {
  for (int i = 0; i <= 1000; ++i) {
    const double v = i / 1000.0;
    EXPECT_NEAR(srgb_decode(srgb_encode(v)), v, 1e-6);
  }
  EXPECT_NEAR(srgb_encode(0.002), 12.92 * 0.002, 1e-15);
}

TEST(Metrics, NoAntialiasingWorseThanAdaptiveOnCheckerboard) {
  const Shader& s = shader_by_name("checkerboard");
  const PixelGrid grid = make_grid(kTuneSize, kTuneSize);
  const Image truth = supersample_render(*s.graph, grid, kGroundTruthSpp, 1);
  EXPECT_GT(l2_error_srgb(render_image(uniform(s, RuleTag::none()), kTuneSize, kTuneSize), truth),
            l2_error_srgb(render_image(uniform(s, RuleTag::adaptive()), kTuneSize, kTuneSize),
                          truth));
}

TEST(Csv, Format) {
  const std::string csv = metrics_csv({{"a", 1.5, 2.0, 0.125}, {"b,c", 0.1, 1.0, 0.0}});
  EXPECT_EQ(csv,
            "variant_id,runtime_ms,ratio,l2_srgb\n"
            "a,1.5,2,0.125\n"
            "\"b,c\",0.10000000000000001,1,0\n");
}

TEST(Plot, ParetoSvg) {
  const std::string one = pareto_svg("t", {{1.0, 0.1}}, {}, {1.0, 0.3});
  EXPECT_NE(one.find("<svg"), std::string::npos);
  EXPECT_NE(one.find("runtime"), std::string::npos);
  EXPECT_NE(one.find("L2"), std::string::npos);
  // One frontier marker plus the no-AA marker.
  std::size_t circles = 0;
  for (std::size_t p = one.find("<circle"); p != std::string::npos; p = one.find("<circle", p + 1)) {
    ++circles;
  }
  EXPECT_EQ(circles, 2u);
  EXPECT_NE(svg_plot({"a<b"}, {}).find("a&lt;b"), std::string::npos);
}

TEST(Io, WriteTextFileCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "smoothc_render_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_text_file((dir / "f.txt").string(), "hello");
  std::ifstream f(dir / "f.txt");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), "hello");
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace smoothc
