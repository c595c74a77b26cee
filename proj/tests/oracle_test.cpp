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

#include "smoothc/oracle.hpp"

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "smoothc/render.hpp"

namespace smoothc {
namespace {

// Maps standard normals to a kernel-distributed offset with std 1.
double kernel_offset(KernelFamily k, std::span<const double> z) {
  auto uniform = [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); };
  switch (k) {
    case KernelFamily::kGaussian: return z[0];
    case KernelFamily::kBox: return std::sqrt(3.0) * (2.0 * uniform(z[0]) - 1.0);
    case KernelFamily::kTent:
      return std::sqrt(6.0) * (uniform(z[0]) - uniform(z[1]));
  }
  return 0.0;
}

// Two independent routes to the convolution of every table row: adaptive
// quadrature, and sampling the kernel.
TEST(Oracle, QuadratureAgreesWithSampling) {
  std::uint64_t seed = 1;
  for (const TableRow& row : table_rows()) {
    const double x = row.x_lo + 0.37 * (row.x_hi - row.x_lo);
    const double sigma = std::sqrt(row.sigma_lo * row.sigma_hi);
    auto f = [&](double v) { return atomic_value(row.code, v, row.square); };
    const double q = quadrature_smooth(f, row.kernel, x, sigma, false);
    auto sampled = [&](std::span<const double> z) {
      return f(x + sigma * kernel_offset(row.kernel, z));
    };
    const MomentEstimate est = brute_moments(sampled, Eigen::VectorXd::Zero(2),
                                             Eigen::MatrixXd::Identity(2, 2), 400000, seed++);
    EXPECT_NEAR(q, est.mean, 4.0 * est.mean_se + 1e-12) << row.name;
  }
}

// Independent renders differ by Monte Carlo noise alone, so quadrupling
// spp halves their distance.
TEST(Oracle, SupersampledTruthConverges) {
  for (const Shader& s : builtin_shaders()) {
    const PixelGrid grid = make_grid(32, 32);
    auto distance = [&](int spp) {
      return l2_error_srgb(supersample_render(*s.graph, grid, spp, 1),
                           supersample_render(*s.graph, grid, 2 * spp, 2));
    };
    const double coarse = distance(125), fine = distance(500);
    EXPECT_NEAR(coarse / fine, 2.0, 0.5) << s.name;
    std::printf("%-20s L2(500 vs 1000 spp) = %.4f\n", s.name.c_str(), fine);
  }
}

TEST(Oracle, TaylorTermsOfAQuadratic) {
  // For a quadratic the two-term series is exact: x^2 + sigma^2.
  auto d = [](int k, double v) { return k == 0 ? v * v : 2.0; };
  EXPECT_DOUBLE_EQ(taylor_truncated(d, 1.5, 0.5, 2), 2.25 + 0.25);
  EXPECT_NEAR(quadrature_smooth([](double v) { return v * v; }, KernelFamily::kGaussian, 1.5, 0.5),
              2.5, 1e-9);
}

TEST(Oracle, GoldenCheckerboard) {
  const std::string dir = SMOOTHC_GOLDEN_DIR;
  std::ifstream side(dir + "/checkerboard_64_spp1000.json");
  ASSERT_TRUE(side) << "missing golden sidecar";
  const nlohmann::json meta = nlohmann::json::parse(side);
  const Shader& s = shader_by_name("checkerboard");
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(structural_hash(*s.graph)));
  ASSERT_EQ(meta.at("shader_hash").get<std::string>(), hash) << "shader source changed";

  const PixelGrid grid = make_grid(meta.at("width"), meta.at("height"), meta.at("t"),
                                   meta.at("spatial_sigma"));
  const Image now =
      to_srgb(supersample_render(*s.graph, grid, meta.at("spp"), meta.at("seed").get<std::uint64_t>()));
  const Image golden = to_srgb(read_png(dir + "/checkerboard_64_spp1000.png"));
  ASSERT_EQ(now.width(), golden.width());
  for (int c = 0; c < 3; ++c) {
    // One 8-bit step of slack for values that round differently.
    EXPECT_LE((now[c] - golden[c]).abs().maxCoeff(), 1.0 / 255.0 + 1e-9);
  }
}

}  // namespace
}  // namespace smoothc
