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

// Approximation rules: each maps the (mean, variance) of a node's operands
// to the (mean, variance) of its output.

#ifndef SMOOTHC_RULES_HPP_
#define SMOOTHC_RULES_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "smoothc/autodiff.hpp"
#include "smoothc/ir.hpp"
#include "smoothc/kernels.hpp"

namespace smoothc {

struct NodeStats {
  double mean = 0.0;
  double var = 0.0;

  double sigma() const { return std::sqrt(var); }
  friend bool operator==(const NodeStats&, const NodeStats&) = default;
};

enum class RuleKind : std::uint8_t { kDorn, kAdaptive, kMonteCarlo, kCompact, kNone };
enum class RhoMode : std::uint8_t { kZero, kSampled, kAffine };

inline constexpr std::array<RuleKind, 5> kAllRuleKinds = {
    RuleKind::kDorn, RuleKind::kAdaptive, RuleKind::kMonteCarlo, RuleKind::kCompact,
    RuleKind::kNone};
inline constexpr std::array<int, 5> kMcSampleCounts = {2, 4, 8, 16, 32};
inline constexpr std::array<RhoMode, 3> kAllRhoModes = {RhoMode::kZero, RhoMode::kSampled,
                                                        RhoMode::kAffine};
inline constexpr double kDefaultLambda = 0.5;

std::string_view rule_kind_name(RuleKind k);
std::string_view rho_mode_name(RhoMode m);

// A rule plus the parameters relevant to it; irrelevant fields stay at
// their defaults so that equality is structural.
struct RuleTag {
  RuleKind kind = RuleKind::kNone;
  int samples = 0;                            // kMonteCarlo
  RhoMode rho = RhoMode::kZero;               // kAdaptive
  KernelFamily kernel = KernelFamily::kBox;   // kCompact

  static RuleTag dorn() { return {RuleKind::kDorn}; }
  static RuleTag adaptive(RhoMode rho = RhoMode::kZero) {
    return {RuleKind::kAdaptive, 0, rho};
  }
  static RuleTag mc(int n) { return {RuleKind::kMonteCarlo, n}; }
  static RuleTag compact(KernelFamily k) {
    return {RuleKind::kCompact, 0, RhoMode::kZero, k};
  }
  static RuleTag none() { return {RuleKind::kNone}; }

  // "dorn", "adaptive:zero", "mc:8", "compact:tent", "none".
  std::string str() const;
  static RuleTag parse(std::string_view text);

  friend bool operator==(const RuleTag&, const RuleTag&) = default;
};

// Whether the adaptive rule of this op consumes a correlation coefficient.
bool uses_rho(Op op);

// Every tag the search may assign to a node with this op: 12 for ops that
// take a correlation mode, 10 otherwise.
std::vector<RuleTag> rule_options(Op op);

class AssignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RuleAssignment {
  std::map<NodeId, RuleTag> tags;
  std::map<NodeId, double> rho_constants;  // filled for kSampled nodes

  const RuleTag& at(NodeId id) const;
  // Same tag on every expression node.
  static RuleAssignment uniform(const ProgramGraph& g, RuleTag tag);

  // {"<id>": {"kind": ..., "n"?, "rho_mode"?, "rho_const"?, "kernel"?}}
  std::string to_json() const;
  static RuleAssignment from_json(std::string_view text);

  // Compact, canonical text used as a cache key (ignores rho constants).
  std::string encode() const;
};

// Throws AssignmentError unless every expression node has a tag valid for
// its op and sampled nodes have rho constants (when require_rho is set).
void validate_assignment(const ProgramGraph& g, const RuleAssignment& a, bool require_rho);

struct TruncationInfo {
  double r = std::numeric_limits<double>::infinity();
  double lambda = kDefaultLambda;
  // Explicit one-sided support [lo, hi] set by the fract guard.
  std::optional<std::pair<double, double>> support;

  double half_width(double h) const { return std::min(h, lambda * r); }
};

// Distance from mu to the nearest point where the unary op is undefined;
// infinity when there is none. Negative input to sqrt/log gives 0.
double singularity_distance(OpCode code, double mu);
TruncationInfo truncation_for(OpCode code, double mu, double lambda = kDefaultLambda);

// Fract bimodality guard: with the input represented as a box of the same
// sigma, a support holding exactly one integer is cut at that integer on the
// side of the mean.
TruncationInfo fract_discontinuity_guard(const NodeStats& in, double lambda = kDefaultLambda);

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RuleDiagnostics {
  long clamped_variances = 0;
  long resampled = 0;
};

// Clamps a variance at zero, counting the event.
double clamp_variance(double var, RuleDiagnostics* diag);

// Dorn et al.'s rule: Gaussian-table mean (compact box where the table has
// no Gaussian entry), output sigma from the linear sigma heuristics with the
// multiply/divide-by-constant correction. `literal` marks operands that are
// constant nodes.
NodeStats propagate_dorn(OpCode code, std::span<const NodeStats> in,
                         std::span<const bool> literal, double lambda = kDefaultLambda,
                         RuleDiagnostics* diag = nullptr);

// Sigma half of the Dorn rule, shared with the none rule.
double dorn_sigma(OpCode code, std::span<const NodeStats> in, std::span<const bool> literal);

// Adaptive Gaussian rule for unary ops; throws NoClosedFormError when the
// Gaussian table has no entry.
NodeStats propagate_adaptive_unary(OpCode code, const NodeStats& in,
                                   RuleDiagnostics* diag = nullptr);

// Bivariate Gaussian moments for add, sub and mul with correlation rho.
NodeStats propagate_adaptive_binary(Op op, const NodeStats& a, const NodeStats& b, double rho,
                                    RuleDiagnostics* diag = nullptr);

// a / b = a * (1/b), reciprocal smoothed by a compact kernel truncated at
// the pole. rho is the correlation between a and 1/b.
NodeStats propagate_div(const NodeStats& a, const NodeStats& b, double rho,
                        double lambda = kDefaultLambda,
                        KernelFamily kernel = KernelFamily::kBox,
                        RuleDiagnostics* diag = nullptr);

// a mod b = b * fract(a / b) for deterministic b.
NodeStats propagate_mod(const NodeStats& a, const NodeStats& b, bool fract_guard = true,
                        double lambda = kDefaultLambda,
                        KernelFamily kernel = KernelFamily::kBox,
                        RuleDiagnostics* diag = nullptr);

// Comparisons as H(a - b) (or H(b - a)); `kernel` selects the H row.
NodeStats propagate_comparison(Op op, const NodeStats& a, const NodeStats& b, double rho,
                               KernelFamily kernel = KernelFamily::kGaussian);

// Correlations used by the select expansion c*a + (1-c)*b.
struct SelectRho {
  double ca = 0.0;     // between c and a
  double cb = 0.0;     // between (1 - c) and b
  double terms = 0.0;  // between c*a and (1-c)*b
};

NodeStats propagate_select(const NodeStats& c, const NodeStats& a, const NodeStats& b,
                           const SelectRho& rho, RuleDiagnostics* diag = nullptr);

// Monte Carlo estimator over given operand samples (one span per operand,
// all of the same length). Output samples are written to `out` when it is
// non-empty. Samples where the op is undefined are pulled toward the operand
// mean to within lambda times the singularity distance.
NodeStats propagate_mc(OpCode code, std::span<const std::span<const double>> samples,
                       std::span<const NodeStats> stats, std::span<double> out,
                       bool bessel = false, double lambda = kDefaultLambda,
                       RuleDiagnostics* diag = nullptr);

// Convenience form drawing independent normal samples for each operand.
NodeStats propagate_mc(OpCode code, std::span<const NodeStats> in, int n, std::uint64_t seed,
                       bool bessel = false);

// Compact kernel rule for unary ops (box or tent), truncated per `trunc`.
NodeStats propagate_compact(OpCode code, const NodeStats& in, KernelFamily kernel,
                            const TruncationInfo& trunc, RuleDiagnostics* diag = nullptr);

// The none rule: direct evaluation on the means, sigma by the Dorn heuristics.
NodeStats propagate_none(OpCode code, std::span<const NodeStats> in,
                         std::span<const bool> literal);

double rho_zero();
// Pearson correlation; 0 for constant or too-short samples.
double rho_sampled(std::span<const double> a, std::span<const double> b);

struct RhoEstimate {
  double rho = 0.0;
  bool degenerate = false;  // a gradient had zero norm
};

// Cosine between two gradients, optionally with per-input standard
// deviations as weights (the correlation of the linearized nodes).
RhoEstimate rho_from_gradients(const InputGradient& ga, const InputGradient& gb,
                               std::span<const double> weights = {});

// Correlation of nodes a and b assuming both are affine in the inputs,
// gradients by reverse-mode differentiation at `point`.
RhoEstimate rho_affine(const ProgramGraph& g, NodeId a, NodeId b,
                       std::span<const double> point, std::span<const double> weights = {});

}  // namespace smoothc

#endif  // SMOOTHC_RULES_HPP_
