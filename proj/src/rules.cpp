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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "smoothc/rng.hpp"

namespace smoothc {

std::string_view rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::kDorn: return "dorn";
    case RuleKind::kAdaptive: return "adaptive";
    case RuleKind::kMonteCarlo: return "mc";
    case RuleKind::kCompact: return "compact";
    case RuleKind::kNone: return "none";
  }
  return "?";
}

std::string_view rho_mode_name(RhoMode m) {
  switch (m) {
    case RhoMode::kZero: return "zero";
    case RhoMode::kSampled: return "sampled";
    case RhoMode::kAffine: return "affine";
  }
  return "?";
}

namespace {

RuleKind parse_kind(std::string_view s) {
  for (RuleKind k : kAllRuleKinds) {
    if (rule_kind_name(k) == s) return k;
  }
  throw AssignmentError("unknown rule kind '" + std::string(s) + "'");
}

RhoMode parse_rho(std::string_view s) {
  for (RhoMode m : kAllRhoModes) {
    if (rho_mode_name(m) == s) return m;
  }
  throw AssignmentError("unknown rho mode '" + std::string(s) + "'");
}

KernelFamily parse_kernel(std::string_view s) {
  if (s == "box") return KernelFamily::kBox;
  if (s == "tent") return KernelFamily::kTent;
  throw AssignmentError("unknown compact kernel '" + std::string(s) + "'");
}

bool valid_sample_count(int n) {
  return std::find(kMcSampleCounts.begin(), kMcSampleCounts.end(), n) != kMcSampleCounts.end();
}

}  // namespace

std::string RuleTag::str() const {
  std::string s(rule_kind_name(kind));
  switch (kind) {
    case RuleKind::kAdaptive: return s + ":" + std::string(rho_mode_name(rho));
    case RuleKind::kMonteCarlo: return s + ":" + std::to_string(samples);
    case RuleKind::kCompact: return s + ":" + std::string(kernel_name(kernel));
    default: return s;
  }
}

RuleTag RuleTag::parse(std::string_view text) {
  const std::size_t colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  switch (parse_kind(head)) {
    case RuleKind::kDorn: return dorn();
    case RuleKind::kNone: return none();
    case RuleKind::kAdaptive: return adaptive(arg.empty() ? RhoMode::kZero : parse_rho(arg));
    case RuleKind::kCompact: return compact(arg.empty() ? KernelFamily::kBox : parse_kernel(arg));
    case RuleKind::kMonteCarlo: {
      int n = 0;
      try {
        n = std::stoi(std::string(arg));
      } catch (const std::exception&) {
        throw AssignmentError("bad sample count in '" + std::string(text) + "'");
      }
      if (!valid_sample_count(n)) {
        throw AssignmentError("sample count " + std::to_string(n) + " not in {2,4,8,16,32}");
      }
      return mc(n);
    }
  }
  throw AssignmentError("bad rule tag '" + std::string(text) + "'");
}

bool uses_rho(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kSelect:
      return true;
    default:
      return is_comparison(op);
  }
}

std::vector<RuleTag> rule_options(Op op) {
  std::vector<RuleTag> out{RuleTag::dorn()};
  if (uses_rho(op)) {
    for (RhoMode m : kAllRhoModes) out.push_back(RuleTag::adaptive(m));
  } else {
    out.push_back(RuleTag::adaptive());
  }
  for (int n : kMcSampleCounts) out.push_back(RuleTag::mc(n));
  out.push_back(RuleTag::compact(KernelFamily::kBox));
  out.push_back(RuleTag::compact(KernelFamily::kTent));
  out.push_back(RuleTag::none());
  return out;
}

const RuleTag& RuleAssignment::at(NodeId id) const {
  auto it = tags.find(id);
  if (it == tags.end()) {
    throw AssignmentError("assignment has no rule for node " + std::to_string(id));
  }
  return it->second;
}

RuleAssignment RuleAssignment::uniform(const ProgramGraph& g, RuleTag tag) {
  RuleAssignment a;
  for (NodeId id : g.expression_nodes()) {
    RuleTag t = tag;
    if (t.kind == RuleKind::kAdaptive && !uses_rho(g.node(id).op)) t.rho = RhoMode::kZero;
    a.tags[id] = t;
  }
  return a;
}

std::string RuleAssignment::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [id, tag] : tags) {
    nlohmann::ordered_json e;
    e["kind"] = rule_kind_name(tag.kind);
    switch (tag.kind) {
      case RuleKind::kMonteCarlo:
        e["n"] = tag.samples;
        break;
      case RuleKind::kAdaptive:
        e["rho_mode"] = rho_mode_name(tag.rho);
        if (auto it = rho_constants.find(id); it != rho_constants.end()) {
          e["rho_const"] = it->second;
        }
        break;
      case RuleKind::kCompact:
        e["kernel"] = kernel_name(tag.kernel);
        break;
      default:
        break;
    }
    j[std::to_string(id)] = e;
  }
  return j.dump(2);
}

RuleAssignment RuleAssignment::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw AssignmentError(std::string("assignment JSON: ") + e.what());
  }
  if (!j.is_object()) throw AssignmentError("assignment JSON must be an object");
  RuleAssignment a;
  for (const auto& [key, e] : j.items()) {
    NodeId id = 0;
    try {
      std::size_t used = 0;
      id = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw AssignmentError("assignment key '" + key + "' is not a node id");
    }
    try {
      RuleTag t;
      t.kind = parse_kind(e.at("kind").get<std::string>());
      if (t.kind == RuleKind::kMonteCarlo) {
        t.samples = e.at("n").get<int>();
        if (!valid_sample_count(t.samples)) {
          throw AssignmentError("node " + key + ": sample count not in {2,4,8,16,32}");
        }
      }
      if (t.kind == RuleKind::kAdaptive) {
        t.rho = e.contains("rho_mode") ? parse_rho(e["rho_mode"].get<std::string>())
                                       : RhoMode::kZero;
        if (e.contains("rho_const")) a.rho_constants[id] = e["rho_const"].get<double>();
      }
      if (t.kind == RuleKind::kCompact) {
        t.kernel = e.contains("kernel") ? parse_kernel(e["kernel"].get<std::string>())
                                        : KernelFamily::kBox;
      }
      a.tags[id] = t;
    } catch (const nlohmann::json::exception& ex) {
      throw AssignmentError("node " + key + ": " + ex.what());
    }
  }
  return a;
}

std::string RuleAssignment::encode() const {
  std::string s;
  for (const auto& [id, tag] : tags) {
    s += std::to_string(id);
    s += '=';
    s += tag.str();
    s += ';';
  }
  return s;
}

void validate_assignment(const ProgramGraph& g, const RuleAssignment& a, bool require_rho) {
  for (NodeId id : g.expression_nodes()) {
    const RuleTag& t = a.at(id);
    const Op op = g.node(id).op;
    if (t.kind == RuleKind::kMonteCarlo && !valid_sample_count(t.samples)) {
      throw AssignmentError("node " + std::to_string(id) + ": bad sample count");
    }
    if (t.kind == RuleKind::kAdaptive && t.rho != RhoMode::kZero && !uses_rho(op)) {
      throw AssignmentError("node " + std::to_string(id) + ": " +
                            std::string(op_name(op)) + " takes no correlation mode");
    }
    if (t.kind == RuleKind::kCompact && t.kernel == KernelFamily::kGaussian) {
      throw AssignmentError("node " + std::to_string(id) + ": compact kernel must be box or tent");
    }
    if (require_rho && t.kind == RuleKind::kAdaptive && t.rho == RhoMode::kSampled) {
      auto it = a.rho_constants.find(id);
      if (it == a.rho_constants.end() || !(std::abs(it->second) <= 1.0)) {
        throw AssignmentError("node " + std::to_string(id) + ": missing rho constant");
      }
    }
  }
  for (const auto& [id, tag] : a.tags) {
    if (id < 0 || id >= static_cast<NodeId>(g.size())) {
      throw AssignmentError("assignment names unknown node " + std::to_string(id));
    }
    const Op op = g.node(id).op;
    if (op == Op::kInput || op == Op::kConst) {
      throw AssignmentError("node " + std::to_string(id) + " is not an expression node");
    }
  }
}

double singularity_distance(OpCode code, double mu) {
  switch (code.op) {
    case Op::kReciprocal:
      return std::abs(mu);
    case Op::kPowInt:
      return code.power < 0 ? std::abs(mu) : std::numeric_limits<double>::infinity();
    case Op::kSqrt:
    case Op::kLog:
      return std::max(mu, 0.0);
    case Op::kTan:
      return detail::tan_pole_distance(mu);
    default:
      return std::numeric_limits<double>::infinity();
  }
}

TruncationInfo truncation_for(OpCode code, double mu, double lambda) {
  TruncationInfo t;
  t.r = singularity_distance(code, mu);
  t.lambda = lambda;
  return t;
}

TruncationInfo fract_discontinuity_guard(const NodeStats& in, double lambda) {
  TruncationInfo t;
  t.lambda = lambda;
  const double h = box_half_width(in.sigma());
  if (!(h > 0.0)) return t;
  const double lo = in.mean - h;
  const double hi = in.mean + h;
  const double first = std::floor(lo) + 1.0;
  const double last = std::ceil(hi) - 1.0;
  if (last - first == 0.0) {
    const double k = first;
    t.support = in.mean >= k ? std::make_pair(k, hi) : std::make_pair(lo, k);
  }
  return t;
}

double clamp_variance(double var, RuleDiagnostics* diag) {
  if (var < 0.0) {
    if (diag) ++diag->clamped_variances;
    return 0.0;
  }
  return var;
}

namespace {

double direct(OpCode code, std::span<const NodeStats> in) {
  std::array<double, 3> m{};
  for (std::size_t i = 0; i < in.size(); ++i) m[i] = in[i].mean;
  return apply_op(code, {m.data(), in.size()});
}

NodeStats heaviside_stats(Op op, const NodeStats& d, const NodeStats& a, const NodeStats& b,
                          KernelFamily kernel) {
  if (!(d.var > 0.0)) {
    const double m[2] = {a.mean, b.mean};
    return {apply_op({op, 0}, m), 0.0};
  }
  const double mu = smooth_atomic(OpCode{Op::kHeaviside}, kernel, d.mean, d.sigma(), false);
  return {mu, std::max(mu - mu * mu, 0.0)};
}

bool greater_form(Op op) { return op == Op::kCmpGt || op == Op::kCmpGe; }

double operand_singularity_distance(OpCode code, int k, std::span<const NodeStats> stats) {
  switch (code.op) {
    case Op::kDiv:
    case Op::kMod:
      return k == 1 ? std::abs(stats[1].mean) : std::numeric_limits<double>::infinity();
    default:
      return k == 0 ? singularity_distance(code, stats[0].mean)
                    : std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double dorn_sigma(OpCode code, std::span<const NodeStats> in, std::span<const bool> literal) {
  auto lit = [&](int i) { return i < static_cast<int>(literal.size()) && literal[i]; };
  switch (code.op) {
    case Op::kAdd:
    case Op::kSub:
      return in[0].sigma() + in[1].sigma();
    case Op::kMul:
      if (lit(0)) return std::abs(in[0].mean) * in[1].sigma();
      if (lit(1)) return std::abs(in[1].mean) * in[0].sigma();
      return in[0].sigma() * in[1].sigma();
    case Op::kDiv:
      if (lit(1) || in[1].var == 0.0) return in[0].sigma() / std::abs(in[1].mean);
      return in[0].sigma() / in[1].sigma();
    default: {
      double sum = 0.0;
      int count = 0;
      for (const NodeStats& s : in) {
        if (s.var > 0.0) {
          sum += s.sigma();
          ++count;
        }
      }
      return count ? sum / count : 0.0;
    }
  }
}

NodeStats propagate_dorn(OpCode code, std::span<const NodeStats> in,
                         std::span<const bool> literal, double lambda, RuleDiagnostics* diag) {
  const double sigma = dorn_sigma(code, in, literal);
  double mean = 0.0;
  switch (code.op) {
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kNeg:
    case Op::kSelect:
      mean = direct(code, in);
      break;
    case Op::kDiv:
      mean = propagate_div({in[0].mean, 0.0}, in[1], 0.0, lambda, KernelFamily::kBox, diag).mean;
      break;
    case Op::kMod:
      mean = propagate_mod(in[0], in[1], false, lambda, KernelFamily::kBox, diag).mean;
      break;
    case Op::kCmpGt:
    case Op::kCmpGe:
    case Op::kCmpLt:
    case Op::kCmpLe: {
      const double s = in[0].sigma() + in[1].sigma();
      const double dm = greater_form(code.op) ? in[0].mean - in[1].mean
                                              : in[1].mean - in[0].mean;
      mean = heaviside_stats(code.op, {dm, s * s}, in[0], in[1], KernelFamily::kGaussian).mean;
      break;
    }
    default:
      if (has_closed_form(code, KernelFamily::kGaussian)) {
        mean = smooth_atomic(code, KernelFamily::kGaussian, in[0].mean, in[0].sigma(), false);
      } else {
        mean = propagate_compact(code, in[0], KernelFamily::kBox,
                                 truncation_for(code, in[0].mean, lambda), diag)
                   .mean;
      }
      break;
  }
  return {mean, sigma * sigma};
}

NodeStats propagate_adaptive_unary(OpCode code, const NodeStats& in, RuleDiagnostics* diag) {
  const double s = in.sigma();
  const double m1 = smooth_atomic(code, KernelFamily::kGaussian, in.mean, s, false);
  const double m2 = smooth_atomic(code, KernelFamily::kGaussian, in.mean, s, true);
  return {m1, clamp_variance(m2 - m1 * m1, diag)};
}

NodeStats propagate_adaptive_binary(Op op, const NodeStats& a, const NodeStats& b, double rho,
                                    RuleDiagnostics* diag) {
  const double sa = a.sigma(), sb = b.sigma();
  switch (op) {
    case Op::kAdd:
      return {a.mean + b.mean, clamp_variance(a.var + b.var + 2 * rho * sa * sb, diag)};
    case Op::kSub:
      return {a.mean - b.mean, clamp_variance(a.var + b.var - 2 * rho * sa * sb, diag)};
    case Op::kMul: {
      const double mean = a.mean * b.mean + rho * sa * sb;
      const double var = a.mean * a.mean * b.var + a.var * b.mean * b.mean +
                         2 * rho * a.mean * b.mean * sa * sb + a.var * b.var * (1 + rho * rho);
      return {mean, clamp_variance(var, diag)};
    }
    default:
      break;
  }
  throw std::invalid_argument("propagate_adaptive_binary: op must be add, sub or mul");
}

NodeStats propagate_div(const NodeStats& a, const NodeStats& b, double rho, double lambda,
                        KernelFamily kernel, RuleDiagnostics* diag) {
  NodeStats recip;
  if (b.var == 0.0) {
    if (b.mean == 0.0) throw RuleError("division by zero");
    recip = {1.0 / b.mean, 0.0};
  } else {
    recip = propagate_compact(OpCode{Op::kReciprocal}, b, kernel,
                              truncation_for(OpCode{Op::kReciprocal}, b.mean, lambda), diag);
  }
  return propagate_adaptive_binary(Op::kMul, a, recip, rho, diag);
}

NodeStats propagate_mod(const NodeStats& a, const NodeStats& b, bool fract_guard,
                        double lambda, KernelFamily kernel, RuleDiagnostics* diag) {
  if (b.var > 0.0) throw RuleError("mod with a random modulus");
  if (b.mean == 0.0) throw RuleError("mod by zero");
  const NodeStats u{a.mean / b.mean, a.var / (b.mean * b.mean)};
  TruncationInfo trunc;
  trunc.lambda = lambda;
  if (fract_guard) trunc = fract_discontinuity_guard(u, lambda);
  const NodeStats f = propagate_compact(OpCode{Op::kFract}, u, kernel, trunc, diag);
  return {b.mean * f.mean, b.mean * b.mean * f.var};
}

NodeStats propagate_comparison(Op op, const NodeStats& a, const NodeStats& b, double rho,
                               KernelFamily kernel) {
  if (!is_comparison(op)) throw std::invalid_argument("propagate_comparison: not a comparison");
  const NodeStats d = greater_form(op) ? propagate_adaptive_binary(Op::kSub, a, b, rho)
                                       : propagate_adaptive_binary(Op::kSub, b, a, rho);
  return heaviside_stats(op, d, a, b, kernel);
}

NodeStats propagate_select(const NodeStats& c, const NodeStats& a, const NodeStats& b,
                           const SelectRho& rho, RuleDiagnostics* diag) {
  const NodeStats t1 = propagate_adaptive_binary(Op::kMul, c, a, rho.ca, diag);
  const NodeStats t2 = propagate_adaptive_binary(Op::kMul, {1.0 - c.mean, c.var}, b, rho.cb, diag);
  return propagate_adaptive_binary(Op::kAdd, t1, t2, rho.terms, diag);
}

NodeStats propagate_mc(OpCode code, std::span<const std::span<const double>> samples,
                       std::span<const NodeStats> stats, std::span<double> out, bool bessel,
                       double lambda, RuleDiagnostics* diag) {
  const int k = static_cast<int>(samples.size());
  const std::size_t n = samples.empty() ? 0 : samples[0].size();
  if (n < 2) throw std::invalid_argument("propagate_mc needs at least 2 samples");
  std::array<double, 3> args{};
  double sum = 0.0;
  double sum_sq = 0.0;
  const double shift = direct(code, stats);
  const bool use_shift = std::isfinite(shift);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) args[j] = samples[j][i];
    std::span<const double> view(args.data(), static_cast<std::size_t>(k));
    double v = apply_op(code, view);
    if (!std::isfinite(v)) {
      for (int j = 0; j < k; ++j) {
        const double r = operand_singularity_distance(code, j, stats);
        if (std::isfinite(r)) {
          const double lim = lambda * r;
          args[j] = stats[j].mean + std::clamp(args[j] - stats[j].mean, -lim, lim);
        }
      }
      v = apply_op(code, view);
      if (!std::isfinite(v)) {
        throw RuleError(std::string(op_name(code.op)) + " undefined at a sample near the mean");
      }
      if (diag) ++diag->resampled;
    }
    if (!out.empty()) out[i] = v;
    const double dv = use_shift ? v - shift : v;
    sum += dv;
    sum_sq += dv * dv;
  }
  const double nn = static_cast<double>(n);
  const double m = sum / nn;
  double var = sum_sq / nn - m * m;
  if (bessel) var *= nn / (nn - 1.0);
  return {use_shift ? m + shift : m, clamp_variance(var, diag)};
}

NodeStats propagate_mc(OpCode code, std::span<const NodeStats> in, int n, std::uint64_t seed,
                       bool bessel) {
  std::vector<std::vector<double>> draws(in.size(), std::vector<double>(n));
  std::vector<std::span<const double>> views;
  for (std::size_t j = 0; j < in.size(); ++j) {
    const double s = in[j].sigma();
    for (int i = 0; i < n; ++i) {
      draws[j][i] = in[j].mean + s * normal_at(seed, stream_id(Stream::kOperand, j), 0, i);
    }
    views.emplace_back(draws[j]);
  }
  return propagate_mc(code, views, in, {}, bessel);
}

NodeStats propagate_compact(OpCode code, const NodeStats& in, KernelFamily kernel,
                            const TruncationInfo& trunc, RuleDiagnostics* diag) {
  if (kernel == KernelFamily::kGaussian) {
    throw std::invalid_argument("propagate_compact: kernel must be box or tent");
  }
  const double s = in.sigma();
  auto at_mean = [&]() -> NodeStats {
    const double v = atomic_value(code, in.mean, false);
    if (!std::isfinite(v)) {
      throw RuleError(std::string(op_name(code.op)) + " evaluated at a singularity");
    }
    return {v, 0.0};
  };
  if (!(s > 0.0)) return at_mean();
  if (trunc.support) {
    const auto [lo, hi] = *trunc.support;
    const double m1 = box_average(code, lo, hi, false);
    const double m2 = box_average(code, lo, hi, true);
    return {m1, clamp_variance(m2 - m1 * m1, diag)};
  }
  if (trunc.r == 0.0) return at_mean();
  const double scale = kernel == KernelFamily::kBox ? kSqrt3 : kSqrt6;
  const double h = scale * s;
  const double hw = trunc.half_width(h);
  const double s_eff = hw < h ? hw / scale : s;
  const double m1 = smooth_atomic(code, kernel, in.mean, s_eff, false);
  const double m2 = smooth_atomic(code, kernel, in.mean, s_eff, true);
  return {m1, clamp_variance(m2 - m1 * m1, diag)};
}

NodeStats propagate_none(OpCode code, std::span<const NodeStats> in,
                         std::span<const bool> literal) {
  const double sigma = dorn_sigma(code, in, literal);
  return {direct(code, in), sigma * sigma};
}

double rho_zero() { return 0.0; }

double rho_sampled(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
  return std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
}

RhoEstimate rho_from_gradients(const InputGradient& ga, const InputGradient& gb,
                               std::span<const double> weights) {
  InputGradient wa = ga, wb = gb;
  if (!weights.empty()) {
    for (Eigen::Index i = 0; i < wa.size(); ++i) {
      wa[i] *= weights[i];
      wb[i] *= weights[i];
    }
  }
  const double na = wa.norm(), nb = wb.norm();
  if (!(na > 0.0) || !(nb > 0.0)) return {0.0, true};
  return {std::clamp(wa.dot(wb) / (na * nb), -1.0, 1.0), false};
}

RhoEstimate rho_affine(const ProgramGraph& g, NodeId a, NodeId b,
                       std::span<const double> point, std::span<const double> weights) {
  return rho_from_gradients(gradient(g, a, point), gradient(g, b, point), weights);
}

}  // namespace smoothc
