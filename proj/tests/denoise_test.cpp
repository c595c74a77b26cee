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

#include "smoothc/denoise.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "smoothc/oracle.hpp"
#include "smoothc/render.hpp"

namespace smoothc {
namespace {

Image mc_render(const char* shader, int size, int n) {
  const Shader& s = shader_by_name(shader);
  return render_image(compile(s.graph, RuleAssignment::uniform(*s.graph, RuleTag::mc(n))), size,
                      size);
}

double rms_diff(const Image& a, const Image& b) {
  double s = 0.0;
  for (int c = 0; c < a.channel_count(); ++c) s += (a[c] - b[c]).square().sum();
  return std::sqrt(s / (static_cast<double>(a.width()) * a.height() * a.channel_count()));
}

TEST(Pyramid, ReconstructsExactly) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto [w, h] : {std::pair{32, 32}, std::pair{33, 17}, std::pair{7, 9}}) {
    Image img(w, h, 3);
    for (int c = 0; c < 3; ++c) img[c] = img[c].unaryExpr([&](double) { return u(rng); });
    const auto bands = laplacian_pyramid(img, 3);
    ASSERT_EQ(bands.size(), 3u);
    EXPECT_EQ(bands[1].width(), (w + 1) / 2);
    EXPECT_EQ(bands[2].height(), ((h + 1) / 2 + 1) / 2);
    EXPECT_LT(rms_diff(reconstruct_pyramid(bands), img), 1e-14);
  }
}

TEST(Denoise, ConstantImageUnchanged) {
  const Image img(24, 20, 3, 0.3);
  const Image out = nlmeans_denoise(img);
  for (int c = 0; c < 3; ++c) EXPECT_LT((out[c] - 0.3).abs().maxCoeff(), 1e-6);
}

TEST(Denoise, TinyHKeepsNoiseFreeImage) {
  // Large flat cells: the noise estimate is zero, so only identical
  // patches get weight.
  Image img(40, 40, 3);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 40; ++c) {
      const double v = ((r / 10 + c / 10) % 2) ? 0.8 : 0.1;
      for (int k = 0; k < 3; ++k) img[k](r, c) = v * (1.0 - 0.2 * k);
    }
  }
  EXPECT_EQ(estimate_noise_sigma(to_srgb(img)), 0.0);
  DenoiseConfig cfg;
  cfg.h_fine = cfg.h_coarse = 1e-6;
  EXPECT_LT(rms_diff(nlmeans_denoise(img, cfg), img), 1e-6);
}

TEST(Denoise, ReducesMonteCarloErrorOnCheckerboard) {
  const Shader& s = shader_by_name("checkerboard");
  const Image truth = supersample_render(*s.graph, make_grid(64, 64), kGroundTruthSpp, 1);
  const Image noisy = mc_render("checkerboard", 64, 8);
  EXPECT_LT(l2_error_srgb(nlmeans_denoise(noisy), truth), l2_error_srgb(noisy, truth));
}

TEST(Denoise, SecondPassChangesLess) {
  for (const char* name : {"checkerboard", "circles", "zigzag"}) {
    const Image noisy = mc_render(name, 48, 4);
    const Image once = nlmeans_denoise(noisy);
    const Image twice = nlmeans_denoise(once);
    EXPECT_LT(l2_error_srgb(twice, once), l2_error_srgb(once, noisy)) << name;
  }
}

TEST(Denoise, PreservesMean) {
  const Image noisy = mc_render("quadratic_sine", 48, 4);
  const Image enc = to_srgb(noisy);
  const Image out = to_srgb(nlmeans_denoise(noisy));
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(out[c].mean(), enc[c].mean(), 0.01 * enc[c].mean());
  }
  // The coarse residual on its own.
  const auto bands = laplacian_pyramid(enc, 3);
  const Image coarse = nlmeans(bands[2], 5, 10, 10.0 / 255.0, 0.0);
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(coarse[c].mean(), bands[2][c].mean(), 0.01 * bands[2][c].mean());
  }
}

TEST(Denoise, WorkersDoNotChangeResult) {
  const Image noisy = mc_render("bricks", 32, 2);
  DenoiseConfig one, four;
  four.workers = 4;
  EXPECT_EQ(nlmeans_denoise(noisy, one), nlmeans_denoise(noisy, four));
}

TEST(Denoise, Errors) {
  DenoiseConfig cfg;
  cfg.patch_size = 4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.levels = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.h_fine = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(nlmeans_denoise(Image(3, 3, 3)), std::invalid_argument);
}

TEST(NoiseEstimate, MatchesKnownGaussianNoise) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 0.05);
  Image img(128, 128, 1, 0.5);
  img[0] = img[0].unaryExpr([&](double v) { return v + n(rng); });
  EXPECT_NEAR(estimate_noise_sigma(img), 0.05, 0.004);
}

}  // namespace
}  // namespace smoothc
