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

#include "smoothc/compile.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "smoothc/parallel.hpp"
#include "smoothc/rng.hpp"

namespace smoothc {

std::string_view scale_class_name(ScaleClass c) {
  switch (c) {
    case ScaleClass::kInput: return "input";
    case ScaleClass::kDorn: return "dorn";
    case ScaleClass::kAdaptive: return "adaptive";
    case ScaleClass::kMonteCarlo: return "mc";
    case ScaleClass::kCompact: return "compact";
    case ScaleClass::kNone: return "none";
  }
  return "?";
}

ScaleClass scale_class_of(const ProgramGraph& g, const RuleAssignment& a, NodeId id) {
  const Node& n = g.node(id);
  if (n.op == Op::kInput) return ScaleClass::kInput;
  if (n.op == Op::kConst) return ScaleClass::kNone;
  switch (a.at(id).kind) {
    case RuleKind::kDorn: return ScaleClass::kDorn;
    case RuleKind::kAdaptive: return ScaleClass::kAdaptive;
    case RuleKind::kMonteCarlo: return ScaleClass::kMonteCarlo;
    case RuleKind::kCompact: return ScaleClass::kCompact;
    case RuleKind::kNone: return ScaleClass::kNone;
  }
  return ScaleClass::kNone;
}

std::vector<double> expand_class_scales(const ProgramGraph& g, const RuleAssignment& a,
                                        std::span<const double> class_scales) {
  if (class_scales.size() != static_cast<std::size_t>(kNumScaleClasses)) {
    throw std::invalid_argument("expected one scale per scale class");
  }
  std::vector<double> out(g.size(), 1.0);
  for (const Node& n : g.nodes()) {
    if (n.op == Op::kConst) continue;
    out[n.id] = class_scales[static_cast<int>(scale_class_of(g, a, n.id))];
  }
  return out;
}

namespace {

std::string format_point(std::span<const double> point) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < point.size(); ++i) os << (i ? ", " : "") << point[i];
  os << ")";
  return os.str();
}

}  // namespace

EvaluationError::EvaluationError(NodeId node, std::vector<double> point, const std::string& what)
    : std::runtime_error("node " + std::to_string(node) + " at input " + format_point(point) +
                         ": " + what),
      node_(node),
      point_(std::move(point)) {}

std::uint64_t input_stream(std::string_view name) {
  if (name == "x") return stream_id(Stream::kInput, 0);
  if (name == "y") return stream_id(Stream::kInput, 1);
  if (name == "t") return stream_id(Stream::kInput, 2);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return stream_id(Stream::kInput, (h & 0xffffffffull) | (1ull << 40));
}

namespace {

// Cost model, in units of one direct operator evaluation. Calibrated once
// against measured interpreter timings (see runtime_model_test).
constexpr double kNsPerUnit = 9.0;
constexpr double kPixelOverheadUnits = 6.0;

double binary_cost(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub: return 1.5;
    case Op::kMul: return 2.0;
    case Op::kDiv: return 7.0;
    case Op::kMod: return 8.0;
    case Op::kSelect: return 5.0;
    default: return 4.0;  // comparisons
  }
}

}  // namespace

SmoothedProgram compile(GraphPtr g, const RuleAssignment& a, const CompileOptions& opts) {
  if (!g) throw std::invalid_argument("compile: null graph");
  validate_assignment(*g, a, false);
  SmoothedProgram p;
  p.graph_ = g;
  p.assignment_ = a;
  p.options_ = opts;

  std::vector<NodeId> missing_rho;
  for (const auto& [id, tag] : a.tags) {
    if (tag.kind == RuleKind::kAdaptive && tag.rho == RhoMode::kSampled &&
        !a.rho_constants.count(id)) {
      missing_rho.push_back(id);
    }
  }
  if (!missing_rho.empty()) {
    for (const auto& [id, rho] : estimate_rho_constants(*g, opts, missing_rho)) {
      p.assignment_.rho_constants[id] = rho;
    }
  }

  using Mode = SmoothedProgram::Mode;
  std::vector<char> gradient_needed(g->size(), 0);
  bool any_affine = false;
  double cost = kPixelOverheadUnits;
  for (const Node& n : g->nodes()) {
    SmoothedProgram::Step s;
    s.id = n.id;
    s.code = n.code();
    s.args = n.args;
    s.arity = n.arity();
    for (int k = 0; k < s.arity; ++k) s.literal[k] = g->node(n.args[k]).op == Op::kConst;
    if (n.op == Op::kConst) {
      s.mode = Mode::kConst;
      cost += 0.2;
    } else if (n.op == Op::kInput) {
      s.mode = Mode::kInput;
      s.input = n.input;
      s.stream = input_stream(g->inputs()[n.input].name);
      cost += 0.2;
    } else {
      s.tag = p.assignment_.at(n.id);
      const bool unary = s.arity == 1;
      const bool gaussian = has_closed_form(s.code, KernelFamily::kGaussian);
      switch (s.tag.kind) {
        case RuleKind::kNone:
          s.mode = Mode::kNone;
          cost += 1.0;
          break;
        case RuleKind::kDorn:
          s.mode = Mode::kDorn;
          if (unary && !gaussian) p.fallbacks_.push_back(n.id);
          cost += unary ? (gaussian ? 3.0 : 6.0) : binary_cost(n.op) + 0.5;
          break;
        case RuleKind::kAdaptive:
          if (unary) {
            if (gaussian) {
              s.mode = Mode::kAdaptiveUnary;
              cost += 4.0;
            } else {
              s.mode = Mode::kCompactUnary;
              s.kernel = KernelFamily::kBox;
              p.fallbacks_.push_back(n.id);
              cost += 6.0;
            }
          } else {
            s.mode = Mode::kAdaptiveBinary;
            cost += binary_cost(n.op);
            if (s.tag.rho == RhoMode::kSampled) s.rho_const = p.assignment_.rho_constants.at(n.id);
            if (s.tag.rho == RhoMode::kAffine && n.op != Op::kMod) {
              any_affine = true;
              for (int k = 0; k < s.arity; ++k) {
                if (!gradient_needed[n.args[k]]) {
                  gradient_needed[n.args[k]] = 1;
                  cost += 1.5 * static_cast<double>(n.args[k] + 1);
                }
              }
              cost += 3.0;
            }
          }
          break;
        case RuleKind::kCompact:
          s.mode = unary ? Mode::kCompactUnary : Mode::kCompactBinary;
          s.kernel = s.tag.kernel;
          if (unary) {
            cost += s.kernel == KernelFamily::kTent ? 10.0 : 6.0;
          } else {
            cost += binary_cost(n.op) + (s.kernel == KernelFamily::kTent ? 2.0 : 0.0);
          }
          break;
        case RuleKind::kMonteCarlo:
          s.mode = Mode::kMonteCarlo;
          s.sample_offset = p.sample_storage_;
          p.sample_storage_ += s.tag.samples;
          cost += s.tag.samples * (1.5 + 1.2 * s.arity) + 3.0;
          break;
      }
    }
    p.steps_.push_back(s);
  }
  if (any_affine) cost += static_cast<double>(g->size());
  for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
    if (gradient_needed[id]) p.gradient_targets_.push_back(id);
  }
  if (any_affine && g->inputs().size() > static_cast<std::size_t>(kMaxGradientInputs)) {
    throw AssignmentError("affine correlation needs at most 8 program inputs");
  }
  p.scales_.assign(g->size(), 1.0);
  p.cost_units_ = cost;
  return p;
}

SmoothedProgram SmoothedProgram::with_sigma_scales(std::vector<double> scales) const {
  if (scales.size() != graph_->size()) {
    throw std::invalid_argument("sigma-scales must have one entry per node");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("sigma-scales must be positive and finite");
    }
  }
  SmoothedProgram p = *this;
  p.scales_ = std::move(scales);
  return p;
}

Workspace SmoothedProgram::make_workspace() const {
  Workspace ws;
  ws.stats.resize(graph_->size());
  ws.samples.resize(sample_storage_);
  for (auto& v : ws.operand_samples) v.resize(kMcSampleCounts.back());
  if (!gradient_targets_.empty()) {
    ws.direct.resize(graph_->size());
    ws.adjoint.resize(graph_->size());
    ws.gradients.resize(graph_->size());
  }
  return ws;
}

std::vector<double> SmoothedProgram::evaluate(std::span<const NodeStats> inputs,
                                              std::uint64_t pixel) const {
  Workspace ws = make_workspace();
  std::vector<double> out(output_count());
  evaluate(ws, inputs, pixel, out);
  return out;
}

void SmoothedProgram::evaluate(Workspace& ws, std::span<const NodeStats> inputs,
                               std::uint64_t pixel, std::span<double> out) const {
  run(ws, inputs, pixel);
  const auto outputs = graph_->outputs();
  for (std::size_t k = 0; k < outputs.size(); ++k) out[k] = ws.stats[outputs[k].node].mean;
}

std::vector<NodeStats> SmoothedProgram::evaluate_nodes(std::span<const NodeStats> inputs,
                                                       std::uint64_t pixel) const {
  Workspace ws = make_workspace();
  run(ws, inputs, pixel);
  return ws.stats;
}

void SmoothedProgram::run(Workspace& ws, std::span<const NodeStats> inputs,
                          std::uint64_t pixel) const {
  if (inputs.size() != graph_->inputs().size()) {
    throw std::invalid_argument("expected " + std::to_string(graph_->inputs().size()) +
                                " input statistics");
  }
  auto point = [&]() {
    std::vector<double> pt;
    for (const NodeStats& s : inputs) pt.push_back(s.mean);
    return pt;
  };
  if (!gradient_targets_.empty()) prepare_affine(ws, inputs);
  for (const Step& s : steps_) {
    try {
      run_step(s, ws, inputs, pixel);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError(s.id, point(), e.what());
    }
    const NodeStats& r = ws.stats[s.id];
    if (!std::isfinite(r.mean) || !std::isfinite(r.var)) {
      throw EvaluationError(s.id, point(), "non-finite statistics");
    }
  }
}

void SmoothedProgram::prepare_affine(Workspace& ws, std::span<const NodeStats> inputs) const {
  std::array<double, kMaxGradientInputs> means{};
  const std::size_t n = inputs.size();
  for (std::size_t i = 0; i < n; ++i) means[i] = inputs[i].mean;
  evaluate_direct(*graph_, {means.data(), n}, ws.direct);
  for (NodeId id : gradient_targets_) {
    ws.gradients[id] = reverse_gradient(*graph_, ws.direct, id, ws.adjoint);
  }
}

double SmoothedProgram::affine_rho(const Step& s, Workspace& ws,
                                   std::span<const NodeStats> inputs, SelectRho* select) const {
  std::array<double, kMaxGradientInputs> w{};
  const auto ins = graph_->inputs();
  for (std::size_t i = 0; i < ins.size(); ++i) {
    w[i] = std::sqrt(inputs[i].var) * scales_[ins[i].node];
  }
  const std::span<const double> weights(w.data(), ins.size());
  const InputGradient& ga = ws.gradients[s.args[0]];
  const InputGradient& gb = ws.gradients[s.args[1]];
  switch (s.code.op) {
    case Op::kDiv:
      return -rho_from_gradients(ga, gb, weights).rho;
    case Op::kSelect: {
      const InputGradient& gc = ga;
      const InputGradient& g1 = gb;
      const InputGradient& g2 = ws.gradients[s.args[2]];
      const double c = ws.direct[s.args[0]];
      const double a = ws.direct[s.args[1]];
      const double b = ws.direct[s.args[2]];
      const InputGradient t1 = a * gc + c * g1;
      const InputGradient t2 = -b * gc + (1.0 - c) * g2;
      const InputGradient neg_c = -gc;
      select->ca = rho_from_gradients(gc, g1, weights).rho;
      select->cb = rho_from_gradients(neg_c, g2, weights).rho;
      select->terms = rho_from_gradients(t1, t2, weights).rho;
      return select->terms;
    }
    default:
      return rho_from_gradients(ga, gb, weights).rho;
  }
}

std::span<const double> SmoothedProgram::operand_samples(const Step& s, int k, int n,
                                                         Workspace& ws,
                                                         std::uint64_t pixel) const {
  const NodeId a = s.args[k];
  const Step& src = steps_[a];
  if (src.mode == Mode::kMonteCarlo && src.tag.samples == n) {
    return {ws.samples.data() + src.sample_offset, static_cast<std::size_t>(n)};
  }
  std::vector<double>& buf = ws.operand_samples[k];
  const NodeStats& st = ws.stats[a];
  const double sigma = st.sigma();
  const std::uint64_t stream =
      src.mode == Mode::kInput ? src.stream : stream_id(Stream::kOperand, a);
  for (int i = 0; i < n; ++i) {
    buf[i] = sigma > 0.0 ? st.mean + sigma * normal_at(options_.seed, stream, pixel, i)
                         : st.mean;
  }
  return {buf.data(), static_cast<std::size_t>(n)};
}

void SmoothedProgram::run_step(const Step& s, Workspace& ws, std::span<const NodeStats> inputs,
                               std::uint64_t pixel) const {
  std::array<NodeStats, 3> in{};
  for (int k = 0; k < s.arity; ++k) in[k] = ws.stats[s.args[k]];
  const std::span<const NodeStats> ins(in.data(), static_cast<std::size_t>(s.arity));
  const std::span<const bool> lit(s.literal.data(), static_cast<std::size_t>(s.arity));
  const double lambda = options_.lambda;
  RuleDiagnostics* diag = &ws.diag;
  NodeStats r;
  switch (s.mode) {
    case Mode::kConst:
      r = {graph_->node(s.id).value, 0.0};
      break;
    case Mode::kInput:
      r = inputs[s.input];
      break;
    case Mode::kNone:
      r = propagate_none(s.code, ins, lit);
      break;
    case Mode::kDorn:
      r = propagate_dorn(s.code, ins, lit, lambda, diag);
      break;
    case Mode::kAdaptiveUnary:
      r = propagate_adaptive_unary(s.code, in[0], diag);
      break;
    case Mode::kCompactUnary: {
      const TruncationInfo trunc = s.code.op == Op::kFract && options_.fract_guard
                                       ? fract_discontinuity_guard(in[0], lambda)
                                       : truncation_for(s.code, in[0].mean, lambda);
      r = propagate_compact(s.code, in[0], s.kernel, trunc, diag);
      break;
    }
    case Mode::kAdaptiveBinary:
    case Mode::kCompactBinary: {
      const bool adaptive = s.mode == Mode::kAdaptiveBinary;
      double rho = 0.0;
      SelectRho srho;
      if (adaptive) {
        switch (s.tag.rho) {
          case RhoMode::kZero:
            break;
          case RhoMode::kSampled:
            rho = s.rho_const;
            srho.terms = rho;
            break;
          case RhoMode::kAffine:
            if (s.code.op != Op::kMod) rho = affine_rho(s, ws, inputs, &srho);
            break;
        }
      }
      const KernelFamily compact = adaptive ? KernelFamily::kBox : s.kernel;
      switch (s.code.op) {
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul:
          r = propagate_adaptive_binary(s.code.op, in[0], in[1], rho, diag);
          break;
        case Op::kDiv:
          r = propagate_div(in[0], in[1], rho, lambda, compact, diag);
          break;
        case Op::kMod:
          r = propagate_mod(in[0], in[1], options_.fract_guard, lambda, compact, diag);
          break;
        case Op::kSelect:
          r = propagate_select(in[0], in[1], in[2], srho, diag);
          break;
        default:
          r = propagate_comparison(s.code.op, in[0], in[1], rho,
                                   adaptive ? KernelFamily::kGaussian : s.kernel);
          break;
      }
      break;
    }
    case Mode::kMonteCarlo: {
      const int n = s.tag.samples;
      std::array<std::span<const double>, 3> views;
      for (int k = 0; k < s.arity; ++k) views[k] = operand_samples(s, k, n, ws, pixel);
      std::span<double> out(ws.samples.data() + s.sample_offset, static_cast<std::size_t>(n));
      r = propagate_mc(s.code, {views.data(), static_cast<std::size_t>(s.arity)}, ins, out,
                       options_.bessel, lambda, diag);
      break;
    }
  }
  const double scale = scales_[s.id];
  if (scale != 1.0) {
    r.var *= scale * scale;
    if (s.mode == Mode::kMonteCarlo) {
      double* v = ws.samples.data() + s.sample_offset;
      for (int i = 0; i < s.tag.samples; ++i) v[i] = r.mean + scale * (v[i] - r.mean);
    }
  }
  ws.stats[s.id] = r;
}

namespace {

struct PairSamples {
  std::vector<double> a;
  std::vector<double> b;
};

}  // namespace

std::map<NodeId, double> estimate_rho_constants(const ProgramGraph& g,
                                                const CompileOptions& opts,
                                                std::span<const NodeId> nodes) {
  std::vector<NodeId> targets(nodes.begin(), nodes.end());
  if (targets.empty()) {
    for (NodeId id : g.expression_nodes()) {
      if (uses_rho(g.node(id).op)) targets.push_back(id);
    }
  }
  std::map<NodeId, double> sums;
  std::map<NodeId, int> counts;
  const PixelGrid& grid = opts.training_grid;
  const int spp = std::max(2, opts.rho_samples_per_pixel);
  std::vector<double> values(g.size());
  std::vector<double> point(g.inputs().size());
  std::vector<PairSamples> pairs(targets.size());
  for (int p = 0; p < opts.rho_pixels; ++p) {
    const auto stream = stream_id(Stream::kTraining, 0);
    const int col = std::min(grid.width - 1,
                             static_cast<int>(uniform_at(opts.seed, stream, p, 0) * grid.width));
    const int row = std::min(grid.height - 1,
                             static_cast<int>(uniform_at(opts.seed, stream, p, 1) * grid.height));
    const std::vector<NodeStats> ins = pixel_inputs(g, grid, col, row);
    for (auto& pr : pairs) {
      pr.a.clear();
      pr.b.clear();
    }
    for (int s = 0; s < spp; ++s) {
      for (std::size_t i = 0; i < ins.size(); ++i) {
        const double z = normal_at(opts.seed, stream_id(Stream::kTraining, 1 + i), p, s);
        point[i] = ins[i].mean + ins[i].sigma() * z;
      }
      evaluate_direct(g, point, values);
      for (std::size_t t = 0; t < targets.size(); ++t) {
        const Node& n = g.node(targets[t]);
        double a = 0.0, b = 0.0;
        switch (n.op) {
          case Op::kDiv:
            a = values[n.args[0]];
            b = 1.0 / values[n.args[1]];
            break;
          case Op::kSelect: {
            const double c = values[n.args[0]];
            a = c * values[n.args[1]];
            b = (1.0 - c) * values[n.args[2]];
            break;
          }
          default:
            a = values[n.args[0]];
            b = values[n.args[1]];
            break;
        }
        if (std::isfinite(a) && std::isfinite(b)) {
          pairs[t].a.push_back(a);
          pairs[t].b.push_back(b);
        }
      }
    }
    for (std::size_t t = 0; t < targets.size(); ++t) {
      const auto& pr = pairs[t];
      if (pr.a.size() < 2) continue;
      const auto [amin, amax] = std::minmax_element(pr.a.begin(), pr.a.end());
      const auto [bmin, bmax] = std::minmax_element(pr.b.begin(), pr.b.end());
      if (*amin == *amax || *bmin == *bmax) continue;
      sums[targets[t]] += rho_sampled(pr.a, pr.b);
      counts[targets[t]] += 1;
    }
  }
  std::map<NodeId, double> out;
  for (NodeId id : targets) {
    out[id] = counts[id] ? std::clamp(sums[id] / counts[id], -1.0, 1.0) : 0.0;
  }
  return out;
}

std::vector<NodeStats> pixel_inputs(const ProgramGraph& g, const PixelGrid& grid, int col,
                                    int row) {
  std::vector<NodeStats> out;
  out.reserve(g.inputs().size());
  const double ss = grid.spatial_sigma * grid.spatial_sigma;
  const double ps = grid.parameter_sigma * grid.parameter_sigma;
  for (const InputVar& v : g.inputs()) {
    if (v.name == "x") {
      out.push_back({col + 0.5, ss});
    } else if (v.name == "y") {
      out.push_back({row + 0.5, ss});
    } else if (v.name == "t") {
      out.push_back({grid.t, ps});
    } else {
      out.push_back({0.0, v.role == InputRole::kSpatial ? ss : ps});
    }
  }
  return out;
}

Image evaluate_batch(const SmoothedProgram& p, const PixelGrid& grid, int workers) {
  const int nout = static_cast<int>(p.output_count());
  Image img(grid.width, grid.height, nout);
  workers = std::min(resolve_workers(workers), grid.height);
  std::vector<Workspace> spaces;
  for (int w = 0; w < workers; ++w) spaces.push_back(p.make_workspace());
  parallel_for(grid.height, workers, [&](int w, int row) {
    Workspace& ws = spaces[w];
    std::array<double, 16> out{};
    std::vector<double> big;
    std::span<double> dst(out.data(), std::min<std::size_t>(nout, out.size()));
    if (nout > static_cast<int>(out.size())) {
      big.resize(nout);
      dst = big;
    }
    for (int col = 0; col < grid.width; ++col) {
      const std::vector<NodeStats> ins = pixel_inputs(p.graph(), grid, col, row);
      p.evaluate(ws, ins, grid.pixel_id(col, row), dst);
      for (int c = 0; c < nout; ++c) img[c](row, col) = dst[c];
    }
  });
  return img;
}

double measure_runtime(const SmoothedProgram& p, const PixelGrid& grid, int runs, int warmup,
                       int workers) {
  runs = std::max(runs, 5);
  warmup = std::max(warmup, 1);
  for (int i = 0; i < warmup; ++i) evaluate_batch(p, grid, workers);
  std::vector<double> ms;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    evaluate_batch(p, grid, workers);
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::nth_element(ms.begin(), ms.begin() + ms.size() / 2, ms.end());
  return ms[ms.size() / 2];
}

double modeled_runtime_ms(const SmoothedProgram& p, const PixelGrid& grid) {
  return p.cost_units() * static_cast<double>(grid.width) * grid.height * kNsPerUnit * 1e-6;
}

}  // namespace smoothc
