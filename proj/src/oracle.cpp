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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "smoothc/parallel.hpp"
#include "smoothc/rng.hpp"

namespace smoothc {

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  int max_depth;
  double unresolved = 0.0;  // error estimate left at max depth
};

double simpson_step(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm), frm = (*st.f)(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) throw QuadratureError("integrand is not finite");
  if (depth >= st.max_depth) {
    st.unresolved += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth > 3 && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  std::vector<double> cuts{a, b};
  for (double p : opts.breakpoints) {
    if (p > std::min(a, b) && p < std::max(a, b)) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  SimpsonState st{&f, opts.max_depth};
  double total = 0.0;
  double magnitude = 0.0;
  constexpr int kProbe = 64;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double step = (cuts[i + 1] - cuts[i]) / kProbe;
    for (int j = 0; j < kProbe; ++j) {
      magnitude += std::abs(f(cuts[i] + (j + 0.5) * step)) * step;
    }
  }
  const double tol = std::max(opts.abs_tol, opts.rel_tol * magnitude);
  const double seg_tol = tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    // Evaluate just inside the segment so one-sided limits are used at jumps.
    const double eps = 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)});
    const double l = lo + eps, r = hi - eps;
    const double fl = f(l), fr = f(r), fm = f(0.5 * (l + r));
    const double whole = (r - l) / 6.0 * (fl + 4.0 * fm + fr);
    total += simpson_step(st, l, r, fl, fm, fr, whole, seg_tol, 0);
  }
  if (st.unresolved > tol) {
    std::ostringstream os;
    os << "quadrature did not converge on [" << a << ", " << b
       << "], residual estimate " << st.unresolved;
    throw QuadratureError(os.str());
  }
  return a < b ? total : -total;
}

double quadrature_smooth(const std::function<double(double)>& f, KernelFamily kernel, double x,
                         double sigma, bool square, const QuadratureOptions& opts) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (sigma == 0.0) {
    const double v = f(x);
    return square ? v * v : v;
  }
  double half = 0.0;
  switch (kernel) {
    case KernelFamily::kGaussian: half = opts.gaussian_cut * sigma; break;
    case KernelFamily::kBox: half = box_half_width(sigma); break;
    case KernelFamily::kTent: half = tent_half_width(sigma); break;
  }
  // Integrate over v = x - u, so the caller's breakpoints apply directly.
  auto integrand = [&](double v) {
    const double fv = f(v);
    return (square ? fv * fv : fv) * kernel_pdf(kernel, x - v, sigma);
  };
  QuadratureOptions o = opts;
  o.breakpoints.push_back(x);
  if (kernel == KernelFamily::kGaussian) {
    for (int k = 1; k <= 4; ++k) {
      o.breakpoints.push_back(x - k * sigma);
      o.breakpoints.push_back(x + k * sigma);
    }
  }
  return integrate(integrand, x - half, x + half, o);
}

MomentEstimate brute_moments(const std::function<double(std::span<const double>)>& f,
                             const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                             std::size_t n, std::uint64_t seed) {
  const Eigen::Index d = mean.size();
  if (cov.rows() != d || cov.cols() != d) throw std::invalid_argument("covariance shape");
  if (n < 2) throw std::invalid_argument("need at least two samples");
  // Symmetric square root tolerates rank-deficient covariances (rho = +-1).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::MatrixXd root = eig.eigenvectors() *
                               eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                               eig.eigenvectors().transpose();
  std::vector<double> values(n);
  Eigen::VectorXd z(d), p(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      z[j] = normal_at(seed, stream_id(Stream::kJitter, static_cast<std::uint64_t>(j)), 0, i);
    }
    p = mean + root * z;
    values[i] = f({p.data(), static_cast<std::size_t>(d)});
  }
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(n));
  MomentEstimate out;
  out.n = n;
  out.mean = v.mean();
  const Eigen::ArrayXd c = v - out.mean;
  const double m2 = c.square().mean();
  const double m4 = c.square().square().mean();
  out.var = m2;
  out.mean_se = std::sqrt(m2 / static_cast<double>(n));
  out.var_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(n));
  return out;
}

MomentEstimate brute_moments(OpCode code, std::span<const NodeStats> in, double rho,
                             std::size_t n, std::uint64_t seed) {
  const int k = static_cast<int>(in.size());
  if (k != arity(code.op)) throw std::invalid_argument("operand count does not match operator");
  Eigen::VectorXd mean(k);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    mean[i] = in[i].mean;
    cov(i, i) = in[i].var;
  }
  if (k >= 2) cov(0, 1) = cov(1, 0) = rho * in[0].sigma() * in[1].sigma();
  return brute_moments([&](std::span<const double> a) { return apply_op(code, a); }, mean, cov,
                       n, seed);
}

Image supersample_render(const ProgramGraph& g, const PixelGrid& grid, int spp,
                         std::uint64_t seed, int workers) {
  if (spp < 1) throw std::invalid_argument("samples per pixel must be at least 1");
  const int nout = static_cast<int>(g.outputs().size());
  Image img(grid.width, grid.height, nout);
  const auto ins = g.inputs();
  std::vector<std::uint64_t> streams;
  for (const InputVar& v : ins) streams.push_back(input_stream(v.name));
  workers = std::min(resolve_workers(workers), grid.height);
  parallel_for(grid.height, workers, [&](int, int row) {
    std::vector<double> values(g.size()), point(ins.size()), sum(nout);
    for (int col = 0; col < grid.width; ++col) {
      const std::vector<NodeStats> stats = pixel_inputs(g, grid, col, row);
      const std::uint64_t pixel = grid.pixel_id(col, row);
      std::fill(sum.begin(), sum.end(), 0.0);
      for (int s = 0; s < spp; ++s) {
        for (std::size_t i = 0; i < ins.size(); ++i) {
          const double sigma = stats[i].sigma();
          point[i] = sigma > 0.0 ? stats[i].mean + sigma * normal_at(seed, streams[i], pixel, s)
                                 : stats[i].mean;
        }
        evaluate_direct(g, point, values);
        for (int c = 0; c < nout; ++c) {
          const double v = values[g.outputs()[c].node];
          if (!std::isfinite(v)) {
            throw EvaluationError(g.outputs()[c].node, point, "non-finite sample value");
          }
          sum[c] += v;
        }
      }
      for (int c = 0; c < nout; ++c) img[c](row, col) = sum[c] / spp;
    }
  });
  return img;
}

double taylor_truncated(const std::function<double(int, double)>& derivative, double x,
                        double sigma, int terms) {
  double total = 0.0;
  double coeff = 1.0;  // sigma^(2k) / (2^k k!)
  for (int k = 0; k < terms; ++k) {
    total += coeff * derivative(2 * k, x);
    coeff *= sigma * sigma / (2.0 * (k + 1));
  }
  return total;
}

}  // namespace smoothc

namespace smoothc {

std::vector<TableRow> table_rows() {
  std::vector<OpCode> codes = {{Op::kInput}, {Op::kNeg}};
  for (int p = kMinPowInt; p <= kMaxPowInt; ++p) {
    if (p != 0 && p != 1) codes.push_back({Op::kPowInt, p});
  }
  for (Op op : {Op::kReciprocal, Op::kSqrt, Op::kSin, Op::kCos, Op::kTan, Op::kSinh, Op::kCosh,
                Op::kTanh, Op::kExp, Op::kLog, Op::kFract, Op::kFloor, Op::kCeil,
                Op::kHeaviside}) {
    codes.push_back({op});
  }
  std::vector<TableRow> rows;
  for (const OpCode& code : codes) {
    for (KernelFamily k : {KernelFamily::kGaussian, KernelFamily::kBox, KernelFamily::kTent}) {
      if (!has_closed_form(code, k)) continue;
      for (bool square : {false, true}) {
        TableRow r;
        r.code = code;
        r.kernel = k;
        r.square = square;
        std::string name = code.op == Op::kInput ? "x" : std::string(op_name(code.op));
        if (code.op == Op::kPowInt) name = "x^" + std::to_string(code.power);
        r.name = (square ? "(" + name + ")^2" : name) + "/" + std::string(kernel_name(k));
        const bool positive_domain =
            code.op == Op::kReciprocal || code.op == Op::kSqrt || code.op == Op::kLog ||
            (code.op == Op::kPowInt && code.power < 0);
        if (positive_domain) {
          r.x_lo = 1.0;
          r.x_hi = 3.0;
          r.sigma_lo = 0.02;
          r.sigma_hi = 0.3;
        } else if (code.op == Op::kTan) {
          r.x_lo = -0.6;
          r.x_hi = 0.6;
          r.sigma_lo = 0.02;
          r.sigma_hi = 0.3;
        }
        rows.push_back(r);
      }
    }
  }
  return rows;
}

TableRowReport check_table_row(const TableRow& row, int nx, int ns, double rel_floor) {
  if (nx < 2 || ns < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  const Op op = row.code.op;
  if (op == Op::kFract || op == Op::kFloor || op == Op::kCeil) {
    const double reach = 8.0 * row.sigma_hi + 1.0;
    for (double k = std::floor(row.x_lo - reach); k <= row.x_hi + reach; k += 1.0) {
      opts.breakpoints.push_back(k);
    }
  } else if (op == Op::kHeaviside) {
    opts.breakpoints.push_back(0.0);
  }
  auto f = [&](double v) { return atomic_value(row.code, v, false); };
  TableRowReport rep;
  rep.row = row;
  for (int j = 0; j < ns; ++j) {
    const double sigma =
        row.sigma_lo * std::pow(row.sigma_hi / row.sigma_lo, static_cast<double>(j) / (ns - 1));
    for (int i = 0; i < nx; ++i) {
      const double x = row.x_lo + (row.x_hi - row.x_lo) * i / (nx - 1);
      const double truth = quadrature_smooth(f, row.kernel, x, sigma, row.square, opts);
      const double got = smooth_atomic(row.code, row.kernel, x, sigma, row.square);
      const double err = std::abs(got - truth) / std::max(std::abs(truth), rel_floor);
      if (!(err <= rep.max_rel_error)) {
        rep.max_rel_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
        rep.worst_x = x;
        rep.worst_sigma = sigma;
      }
    }
  }
  return rep;
}

}  // namespace smoothc
