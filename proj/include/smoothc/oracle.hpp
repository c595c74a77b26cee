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

// Reference computations that do not share code paths with the rules:
// numerical convolution, sampled moments and supersampled renders.

#ifndef SMOOTHC_ORACLE_HPP_
#define SMOOTHC_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "smoothc/compile.hpp"
#include "smoothc/image.hpp"
#include "smoothc/ir.hpp"
#include "smoothc/kernels.hpp"

namespace smoothc {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double abs_tol = 1e-9;
  // Tolerance also scales with the integral's magnitude, so large
  // integrands do not recurse into rounding noise.
  double rel_tol = 1e-13;
  int max_depth = 30;
  double gaussian_cut = 8.0;  // in standard deviations
  // Points (in the argument of f) where f or its derivative jumps.
  std::vector<double> breakpoints;
};

// Integral of f(x - u)^(square ? 2 : 1) against the kernel density with
// standard deviation sigma. sigma = 0 returns f(x) directly.
double quadrature_smooth(const std::function<double(double)>& f, KernelFamily kernel, double x,
                         double sigma, bool square = false, const QuadratureOptions& opts = {});

// Adaptive Simpson on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

struct MomentEstimate {
  double mean = 0.0;
  double var = 0.0;
  double mean_se = 0.0;  // standard error of mean
  double var_se = 0.0;   // standard error of var, from the fourth central moment
  std::size_t n = 0;
};

// Sampled mean and variance of f(Z) with Z ~ N(mean, cov). Degenerate
// (singular) covariances are allowed.
MomentEstimate brute_moments(const std::function<double(std::span<const double>)>& f,
                             const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                             std::size_t n = 1000000, std::uint64_t seed = 1);

// Operator convenience: independent inputs except for a correlation rho
// between the first two operands.
MomentEstimate brute_moments(OpCode code, std::span<const NodeStats> in, double rho = 0.0,
                             std::size_t n = 1000000, std::uint64_t seed = 1);

// Mean of the direct program over Gaussian-jittered positions, spp samples
// per pixel. Input draws use the same keys as the Monte Carlo rule, so the
// all-mc(n) program reproduces this render for spp = n.
Image supersample_render(const ProgramGraph& g, const PixelGrid& grid, int spp,
                         std::uint64_t seed, int workers = 1);

// Sum over k < terms of f^(2k)(x) sigma^(2k) / (2^k k!). derivative(k, x)
// returns the k-th derivative.
double taylor_truncated(const std::function<double(int, double)>& derivative, double x,
                        double sigma, int terms = 2);

// One row of the closed-form table: an operator (squared or not) under a
// kernel, with the (x, sigma) box on which it is checked.
struct TableRow {
  std::string name;
  OpCode code;
  KernelFamily kernel = KernelFamily::kGaussian;
  bool square = false;
  double x_lo = -2.0, x_hi = 2.0;
  double sigma_lo = 0.05, sigma_hi = 0.5;
};

// Every (operator, kernel, square) combination with a closed form.
std::vector<TableRow> table_rows();

struct TableRowReport {
  TableRow row;
  double max_rel_error = 0.0;
  double worst_x = 0.0;
  double worst_sigma = 0.0;
};

// Compares smooth_atomic against quadrature_smooth on an nx by ns grid
// (x linear, sigma geometric). Relative error is taken against
// max(|truth|, rel_floor).
TableRowReport check_table_row(const TableRow& row, int nx = 20, int ns = 10,
                               double rel_floor = 1e-3);

}  // namespace smoothc

#endif  // SMOOTHC_ORACLE_HPP_
