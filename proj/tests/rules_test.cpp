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

#include "smoothc/rules.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "smoothc/oracle.hpp"

namespace smoothc {
namespace {

const std::array<bool, 3> kNoLiterals{};

NodeStats S(double mean, double var) { return {mean, var}; }

TEST(Dorn, Examples) {
  const std::array<NodeStats, 2> mul_in{S(3.0, 0.0), S(2.0, 0.25)};
  const std::array<bool, 2> lit{true, false};
  const NodeStats m = propagate_dorn({Op::kMul}, mul_in, lit);
  EXPECT_DOUBLE_EQ(m.mean, 6.0);
  EXPECT_DOUBLE_EQ(m.sigma(), 1.5);

  const std::array<NodeStats, 2> add_in{S(0.0, 0.09), S(1.0, 0.16)};
  EXPECT_NEAR(propagate_dorn({Op::kAdd}, add_in, kNoLiterals).sigma(), 0.7, 1e-15);

  const std::array<NodeStats, 1> sin_in{S(0.0, 0.0)};
  const NodeStats s = propagate_dorn({Op::kSin}, sin_in, kNoLiterals);
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_EQ(s.var, 0.0);
}

TEST(Dorn, DivisionByLiteralScalesSigma) {
  const std::array<NodeStats, 2> in{S(4.0, 1.0), S(2.0, 0.0)};
  const std::array<bool, 2> lit{false, true};
  const NodeStats r = propagate_dorn({Op::kDiv}, in, lit);
  EXPECT_NEAR(r.mean, 2.0, 1e-15);
  EXPECT_NEAR(r.sigma(), 0.5, 1e-15);
}

TEST(Dorn, AveragesNonZeroSigmasForOtherOps) {
  const std::array<NodeStats, 3> in{S(1.0, 0.0), S(0.0, 0.04), S(1.0, 0.16)};
  EXPECT_NEAR(dorn_sigma({Op::kSelect}, in, kNoLiterals), 0.3, 1e-15);
}

TEST(AdaptiveUnary, Examples) {
  const NodeStats id = propagate_adaptive_unary({Op::kInput}, S(0.3, 0.7));
  EXPECT_DOUBLE_EQ(id.mean, 0.3);
  EXPECT_DOUBLE_EQ(id.var, 0.7);

  const NodeStats sq = propagate_adaptive_unary({Op::kPowInt, 2}, S(0.0, 1.0));
  EXPECT_NEAR(sq.mean, 1.0, 1e-15);
  EXPECT_NEAR(sq.var, 2.0, 1e-14);

  const NodeStats sn = propagate_adaptive_unary({Op::kSin}, S(0.0, 1.0));
  EXPECT_NEAR(sn.mean, 0.0, 1e-15);
  EXPECT_NEAR(sn.var, 0.5 * (1.0 - std::exp(-2.0)), 1e-12);

  EXPECT_THROW(propagate_adaptive_unary({Op::kLog}, S(1.0, 0.1)), NoClosedFormError);
}

// Quadrature moments of f(N(mu, s^2)).
TEST(AdaptiveUnary, MatchesQuadratureMoments) {
  const std::vector<OpCode> ops = {{Op::kNeg},  {Op::kPowInt, 2}, {Op::kPowInt, 3},
                                   {Op::kPowInt, 5}, {Op::kSin},  {Op::kCos},
                                   {Op::kSinh}, {Op::kCosh},     {Op::kExp},
                                   {Op::kHeaviside}};
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.breakpoints = {0.0};
  for (const OpCode& code : ops) {
    auto f = [&](double v) { return atomic_value(code, v, false); };
    for (double mu : {-1.1, 0.0, 0.6}) {
      for (double var : {0.01, 0.25}) {
        const double s = std::sqrt(var);
        const double m = quadrature_smooth(f, KernelFamily::kGaussian, mu, s, false, opts);
        const double m2 = quadrature_smooth(f, KernelFamily::kGaussian, mu, s, true, opts);
        const NodeStats r = propagate_adaptive_unary(code, S(mu, var));
        EXPECT_NEAR(r.mean, m, 1e-6 * std::max(1.0, std::abs(m))) << op_name(code.op);
        EXPECT_NEAR(r.var, m2 - m * m, 1e-6 * std::max(1.0, std::abs(m2))) << op_name(code.op);
      }
    }
  }
}

TEST(AdaptiveBinary, Examples) {
  const NodeStats add = propagate_adaptive_binary(Op::kAdd, S(1, 0.09), S(2, 0.16), 0.0);
  EXPECT_NEAR(add.mean, 3.0, 1e-15);
  EXPECT_NEAR(add.var, 0.25, 1e-15);
  const NodeStats mul = propagate_adaptive_binary(Op::kMul, S(0, 1), S(0, 1), 0.0);
  EXPECT_NEAR(mul.mean, 0.0, 1e-15);
  EXPECT_NEAR(mul.var, 1.0, 1e-15);
  const NodeStats sub = propagate_adaptive_binary(Op::kSub, S(0.4, 0.3), S(0.4, 0.3), 1.0);
  EXPECT_NEAR(sub.var, 0.0, 1e-15);
}

TEST(AdaptiveBinary, MatchesSampledMoments) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mean(-1.5, 1.5), var(0.01, 0.5);
  for (Op op : {Op::kAdd, Op::kSub, Op::kMul}) {
    for (double rho : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
      const std::array<NodeStats, 2> in{S(mean(rng), var(rng)), S(mean(rng), var(rng))};
      const MomentEstimate est = brute_moments({op}, in, rho, 200000, 11);
      const NodeStats r = propagate_adaptive_binary(op, in[0], in[1], rho);
      EXPECT_NEAR(r.mean, est.mean, 4 * est.mean_se + 1e-12) << op_name(op) << " rho=" << rho;
      EXPECT_NEAR(r.var, est.var, 4 * est.var_se + 1e-12) << op_name(op) << " rho=" << rho;
    }
  }
}

TEST(Div, Examples) {
  const NodeStats half = propagate_div(S(4, 1), S(2, 0), 0.0);
  EXPECT_NEAR(half.mean, 2.0, 1e-15);
  EXPECT_NEAR(half.var, 0.25, 1e-15);

  const double h = std::sqrt(3.0) * 0.1;
  const NodeStats r = propagate_div(S(1, 0), S(1, 0.01), 0.0);
  EXPECT_NEAR(r.mean, std::log((1 + h) / (1 - h)) / (2 * h), 1e-12);
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  const double q = quadrature_smooth([](double v) { return 1.0 / v; }, KernelFamily::kBox, 1.0,
                                     0.1, false, opts);
  EXPECT_NEAR(r.mean, q, 1e-10);

  EXPECT_THROW(propagate_div(S(1, 0), S(0, 0), 0.0), RuleError);
}

TEST(Mod, Examples) {
  const NodeStats a = propagate_mod(S(2.5, 0), S(1, 0));
  EXPECT_NEAR(a.mean, 0.5, 1e-15);
  EXPECT_NEAR(a.var, 0.0, 1e-15);
  const NodeStats b = propagate_mod(S(0.5, 1e-4), S(1, 0));
  EXPECT_NEAR(b.mean, 0.5, 1e-12);
  EXPECT_THROW(propagate_mod(S(0.5, 0.1), S(1, 0.1)), RuleError);
  EXPECT_THROW(propagate_mod(S(0.5, 0.1), S(0, 0)), RuleError);
}

TEST(Mod, GuardKeepsMeanOnOneSideOfTheJump) {
  // Untruncated, fract(N(0, 0.01)) is bimodal with mean near 1/2.
  const MomentEstimate bimodal = brute_moments({Op::kFract}, std::array{S(0, 0.01)}, 0.0, 100000);
  EXPECT_NEAR(bimodal.mean, 0.5, 0.01);
  const double hw = std::sqrt(3.0) * 0.1;
  const NodeStats guarded = propagate_mod(S(0, 0.01), S(1, 0), true);
  EXPECT_NEAR(guarded.mean, hw / 2, 1e-12);
  EXPECT_NEAR(guarded.var, hw * hw / 12, 1e-12);
  const NodeStats unguarded = propagate_mod(S(0, 0.01), S(1, 0), false);
  EXPECT_NEAR(unguarded.mean, 0.5, 1e-12);
}

TEST(Mod, ScaledModulusMatchesSampledMoments) {
  // Away from the jump the guard is inactive and the rule is exact for the
  // box representation; compare against the sampled fract of the box.
  const NodeStats r = propagate_mod(S(1.3, 0.04), S(2, 0), false);
  QuadratureOptions opts;
  opts.breakpoints = {0.0, 2.0};
  auto f = [](double v) { return v - 2.0 * std::floor(v / 2.0); };
  const double m = quadrature_smooth(f, KernelFamily::kBox, 1.3, 0.2, false, opts);
  const double m2 = quadrature_smooth(f, KernelFamily::kBox, 1.3, 0.2, true, opts);
  EXPECT_NEAR(r.mean, m, 1e-9);
  EXPECT_NEAR(r.var, m2 - m * m, 1e-9);
}

TEST(Comparison, Examples) {
  EXPECT_EQ(propagate_comparison(Op::kCmpGt, S(1, 0), S(1, 0), 0.0).mean, 0.0);
  EXPECT_NEAR(propagate_comparison(Op::kCmpGt, S(1, 0.04), S(1, 0), 0.0).mean, 0.5, 1e-15);
  EXPECT_NEAR(propagate_comparison(Op::kCmpGt, S(0.6, 0.04), S(0, 0), 0.0).mean,
              0.5 * (1 + std::erf(3 / std::sqrt(2.0))), 1e-12);
  EXPECT_NEAR(propagate_comparison(Op::kCmpLt, S(0, 0), S(0.6, 0.04), 0.0).mean,
              0.5 * (1 + std::erf(3 / std::sqrt(2.0))), 1e-12);
  EXPECT_EQ(propagate_comparison(Op::kCmpGe, S(0.2, 0.01), S(0, 0), 0.0).mean,
            propagate_comparison(Op::kCmpGt, S(0.2, 0.01), S(0, 0), 0.0).mean);
}

TEST(Select, Examples) {
  const NodeStats a = S(0.3, 0.2), b = S(-1.0, 0.5);
  const NodeStats one = propagate_select(S(1, 0), a, b, {});
  EXPECT_NEAR(one.mean, a.mean, 1e-15);
  EXPECT_NEAR(one.var, a.var, 1e-15);
  const NodeStats zero = propagate_select(S(0, 0), a, b, {});
  EXPECT_NEAR(zero.mean, b.mean, 1e-15);
  EXPECT_NEAR(zero.var, b.var, 1e-15);
  const NodeStats mid = propagate_select(S(0.5, 0), S(0, 0), S(1, 0), {});
  EXPECT_NEAR(mid.mean, 0.5, 1e-15);
  EXPECT_NEAR(mid.var, 0.0, 1e-15);
}

TEST(MonteCarlo, IdentityConverges) {
  const NodeStats r = propagate_mc({Op::kInput}, std::array{S(0.7, 0.3)}, 32, 5);
  EXPECT_NEAR(r.mean, 0.7, 4 * std::sqrt(0.3 / 32));
  const std::vector<double> samples{1.0, 2.0, 4.0};
  const std::array<std::span<const double>, 1> views{samples};
  const NodeStats exact = propagate_mc({Op::kInput}, views, std::array{S(2, 1)}, {}, false);
  EXPECT_NEAR(exact.mean, 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(exact.var, (1.0 + 4.0 + 16.0) / 3.0 - 49.0 / 9.0, 1e-14);
  const NodeStats bessel = propagate_mc({Op::kInput}, views, std::array{S(2, 1)}, {}, true);
  EXPECT_NEAR(bessel.var, exact.var * 1.5, 1e-14);
}

TEST(MonteCarlo, Deterministic) {
  const NodeStats a = propagate_mc({Op::kSin}, std::array{S(1, 0.25)}, 16, 99);
  const NodeStats b = propagate_mc({Op::kSin}, std::array{S(1, 0.25)}, 16, 99);
  EXPECT_EQ(a, b);
  const NodeStats c = propagate_mc({Op::kSin}, std::array{S(1, 0.25)}, 16, 100);
  EXPECT_NE(a.mean, c.mean);
}

TEST(MonteCarlo, GoldenSquare) {
  std::ifstream in(std::string(SMOOTHC_GOLDEN_DIR) + "/mc_square_n32_seed1.json");
  ASSERT_TRUE(in) << "missing golden file";
  const nlohmann::json golden = nlohmann::json::parse(in);
  const NodeStats r = propagate_mc({Op::kPowInt, 2}, std::array{S(0, 1)}, 32, 1);
  EXPECT_EQ(r.mean, golden.at("mean").get<double>());
  EXPECT_EQ(r.var, golden.at("var").get<double>());
}

TEST(MonteCarlo, ScalesAsInverseSqrtN) {
  auto spread = [](int n) {
    std::vector<double> means;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      means.push_back(propagate_mc({Op::kSin}, std::array{S(1, 0.25)}, n, seed).mean);
    }
    double m = 0.0;
    for (double v : means) m += v;
    m /= means.size();
    double s = 0.0;
    for (double v : means) s += (v - m) * (v - m);
    return std::sqrt(s / (means.size() - 1));
  };
  const double ratio = spread(4) / spread(64);
  EXPECT_NEAR(ratio, 4.0, 0.8);
}

TEST(MonteCarlo, PullsUndefinedSamplesInward) {
  RuleDiagnostics diag;
  const std::vector<double> samples{-0.5, 1.0, 2.0};
  const std::array<std::span<const double>, 1> views{samples};
  const NodeStats r =
      propagate_mc({Op::kLog}, views, std::array{S(1.0, 0.5)}, {}, false, 0.5, &diag);
  EXPECT_TRUE(std::isfinite(r.mean));
  EXPECT_EQ(diag.resampled, 1);
}

TEST(Compact, Examples) {
  const TruncationInfo t = truncation_for({Op::kSqrt}, 0.01);
  EXPECT_NEAR(t.half_width(10.0), 0.005, 1e-15);
  const NodeStats sq = propagate_compact({Op::kSqrt}, S(0.01, 4.0), KernelFamily::kBox, t);
  const double hw = 0.005;
  const double expect = (std::pow(0.015, 1.5) - std::pow(0.005, 1.5)) / (1.5 * 2 * hw);
  EXPECT_NEAR(sq.mean, expect, 1e-12);

  const NodeStats inv =
      propagate_compact({Op::kReciprocal}, S(1, 1e-4), KernelFamily::kBox,
                        truncation_for({Op::kReciprocal}, 1.0));
  EXPECT_NEAR(inv.mean, smooth_atomic<double>({Op::kReciprocal}, KernelFamily::kBox, 1, 0.01, false),
              1e-15);
  const NodeStats h = propagate_compact({Op::kHeaviside}, S(0, 0.3), KernelFamily::kBox,
                                        truncation_for({Op::kHeaviside}, 0.0));
  EXPECT_NEAR(h.mean, 0.5, 1e-15);
  EXPECT_THROW(propagate_compact({Op::kLog}, S(0, 0.3), KernelFamily::kBox,
                                 truncation_for({Op::kLog}, 0.0)),
               RuleError);
}

TEST(Truncation, SingularityDistances) {
  EXPECT_EQ(singularity_distance({Op::kReciprocal}, -0.3), 0.3);
  EXPECT_EQ(singularity_distance({Op::kLog}, 2.0), 2.0);
  EXPECT_EQ(singularity_distance({Op::kSqrt}, -1.0), 0.0);
  EXPECT_NEAR(singularity_distance({Op::kTan}, 1.0), std::numbers::pi / 2 - 1.0, 1e-15);
  EXPECT_EQ(singularity_distance({Op::kSin}, 1.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(singularity_distance({Op::kPowInt, -2}, 0.5), 0.5);
}

TEST(FractGuard, Examples) {
  const TruncationInfo a = fract_discontinuity_guard(S(0.05, 0.01));
  ASSERT_TRUE(a.support.has_value());
  EXPECT_EQ(a.support->first, 0.0);
  EXPECT_NEAR(a.support->second, 0.05 + std::sqrt(3.0) * 0.1, 1e-15);
  EXPECT_FALSE(fract_discontinuity_guard(S(0.5, 0.0025)).support.has_value());
  EXPECT_FALSE(fract_discontinuity_guard(S(0.5, 100.0)).support.has_value());
  const TruncationInfo b = fract_discontinuity_guard(S(0.95, 0.01));
  ASSERT_TRUE(b.support.has_value());
  EXPECT_NEAR(b.support->first, 0.95 - std::sqrt(3.0) * 0.1, 1e-15);
  EXPECT_EQ(b.support->second, 1.0);
}

TEST(Rho, Examples) {
  const GraphPtr g = parse_shared("let a = x + y\nlet b = x - y\nout p = a\nout q = b\n");
  const NodeId a = g->outputs()[0].node, b = g->outputs()[1].node;
  const std::array<double, 2> pt{0.3, 0.9};
  EXPECT_NEAR(rho_affine(*g, a, b, pt).rho, 0.0, 1e-15);
  EXPECT_NEAR(rho_affine(*g, a, a, pt).rho, 1.0, 1e-15);
  const std::vector<double> v{1, 2, 3};
  EXPECT_NEAR(rho_sampled(v, v), 1.0, 1e-15);
  const std::vector<double> c{2, 2, 2};
  EXPECT_EQ(rho_sampled(v, c), 0.0);
  EXPECT_EQ(rho_zero(), 0.0);
  const GraphPtr k = parse_shared("out = 3.0 + x\n");
  NodeId cid = 0;
  while (k->node(cid).op != Op::kConst) ++cid;
  const RhoEstimate deg = rho_affine(*k, cid, k->outputs()[0].node, std::array{0.5});
  EXPECT_TRUE(deg.degenerate);
  EXPECT_EQ(deg.rho, 0.0);
}

TEST(Rho, AffineAgreesWithSampled) {
  const GraphPtr g = parse_shared("let a = 2*x + 0.5*y\nlet b = x - 3*y\nout p = a\nout q = b\n");
  const NodeId a = g->outputs()[0].node, b = g->outputs()[1].node;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> va, vb, values(g->size());
  for (int i = 0; i < 10000; ++i) {
    const std::array<double, 2> pt{z(rng), z(rng)};
    evaluate_direct(*g, pt, values);
    va.push_back(values[a]);
    vb.push_back(values[b]);
  }
  EXPECT_NEAR(rho_affine(*g, a, b, std::array{0.0, 0.0}).rho, rho_sampled(va, vb), 0.05);
}

TEST(Rules, ZeroVarianceReproducesDirectValue) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.2, 2.5);
  const KernelFamily kernels[] = {KernelFamily::kBox, KernelFamily::kTent};
  for (int op_i = 2; op_i < kNumOps; ++op_i) {
    const Op op = static_cast<Op>(op_i);
    const OpCode code{op, op == Op::kPowInt ? 3 : 0};
    for (int trial = 0; trial < 20; ++trial) {
      std::array<NodeStats, 3> in{S(u(rng), 0), S(u(rng), 0), S(u(rng) / 3.0, 0)};
      if (op == Op::kSelect) in[0].mean = trial % 2;
      const int n = arity(op);
      const std::span<const NodeStats> ins(in.data(), n);
      std::array<double, 3> pt{in[0].mean, in[1].mean, in[2].mean};
      const double direct = apply_op(code, {pt.data(), static_cast<std::size_t>(n)});
      EXPECT_NEAR(propagate_none(code, ins, kNoLiterals).mean, direct, 1e-9) << op_name(op);
      EXPECT_NEAR(propagate_dorn(code, ins, kNoLiterals).mean, direct, 1e-9) << op_name(op);
      if (n == 1) {
        if (has_closed_form(code, KernelFamily::kGaussian)) {
          EXPECT_NEAR(propagate_adaptive_unary(code, in[0]).mean, direct, 1e-9);
        }
        for (KernelFamily k : kernels) {
          EXPECT_NEAR(propagate_compact(code, in[0], k, truncation_for(code, in[0].mean)).mean,
                      direct, 1e-9)
              << op_name(op);
        }
      } else {
        NodeStats r;
        switch (op) {
          case Op::kAdd:
          case Op::kSub:
          case Op::kMul: r = propagate_adaptive_binary(op, in[0], in[1], 0.3); break;
          case Op::kDiv: r = propagate_div(in[0], in[1], 0.3); break;
          case Op::kMod: r = propagate_mod(in[0], in[1]); break;
          case Op::kSelect: r = propagate_select(in[0], in[1], in[2], {}); break;
          default: r = propagate_comparison(op, in[0], in[1], 0.3); break;
        }
        EXPECT_NEAR(r.mean, direct, 1e-9) << op_name(op);
        EXPECT_NEAR(r.var, 0.0, 1e-9) << op_name(op);
      }
    }
  }
}

TEST(RuleTag, RoundTrip) {
  for (Op op : {Op::kAdd, Op::kSin, Op::kSelect}) {
    const auto options = rule_options(op);
    EXPECT_EQ(options.size(), uses_rho(op) ? 12u : 10u);
    for (const RuleTag& t : options) EXPECT_EQ(RuleTag::parse(t.str()), t) << t.str();
  }
  EXPECT_THROW(RuleTag::parse("mc:3"), AssignmentError);
  EXPECT_THROW(RuleTag::parse("bogus"), AssignmentError);
}

TEST(RuleAssignment, JsonRoundTripAndValidation) {
  const GraphPtr g = parse_shared("out = sin(x) * y\n");
  RuleAssignment a = RuleAssignment::uniform(*g, RuleTag::adaptive(RhoMode::kSampled));
  a.tags[g->outputs()[0].node] = RuleTag::mc(8);
  const NodeId s = g->node(g->outputs()[0].node).args[0];
  a.tags[s] = RuleTag::compact(KernelFamily::kTent);
  const RuleAssignment b = RuleAssignment::from_json(a.to_json());
  EXPECT_EQ(a.tags, b.tags);
  EXPECT_EQ(a.encode(), b.encode());
  validate_assignment(*g, a, false);
  RuleAssignment missing = a;
  missing.tags.erase(s);
  EXPECT_THROW(validate_assignment(*g, missing, false), AssignmentError);
  RuleAssignment bad = a;
  bad.tags[s] = RuleTag::adaptive(RhoMode::kAffine);  // sin takes no correlation
  EXPECT_THROW(validate_assignment(*g, bad, false), AssignmentError);
}

TEST(Diagnostics, ClampCounts) {
  RuleDiagnostics d;
  EXPECT_EQ(clamp_variance(-1e-18, &d), 0.0);
  EXPECT_EQ(clamp_variance(0.5, &d), 0.5);
  EXPECT_EQ(d.clamped_variances, 1);
}

}  // namespace
}  // namespace smoothc
