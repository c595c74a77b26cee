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

// Compilation of a graph plus rule assignment into an interpreted plan
// that maps input statistics to smoothed output means.

#ifndef SMOOTHC_COMPILE_HPP_
#define SMOOTHC_COMPILE_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smoothc/autodiff.hpp"
#include "smoothc/image.hpp"
#include "smoothc/ir.hpp"
#include "smoothc/rules.hpp"

namespace smoothc {

// A w x h pixel grid. Pixel (col, row) is centered at (col + 0.5, row + 0.5)
// in x/y units; t is the animation parameter.
struct PixelGrid {
  int width = 64;
  int height = 64;
  double t = 0.0;
  double spatial_sigma = 0.5;
  double parameter_sigma = 0.0;

  std::uint64_t pixel_id(int col, int row) const {
    return static_cast<std::uint64_t>(row) * static_cast<std::uint64_t>(width) +
           static_cast<std::uint64_t>(col);
  }
};

struct CompileOptions {
  std::uint64_t seed = 1;  // MC and training draws
  double lambda = kDefaultLambda;
  bool bessel = false;
  bool fract_guard = true;
  PixelGrid training_grid;  // domain for sampled-constant correlations
  int rho_pixels = 64;
  int rho_samples_per_pixel = 16;
};

// Groups whose sigma-scales are tied by default during refinement.
enum class ScaleClass : std::uint8_t { kInput, kDorn, kAdaptive, kMonteCarlo, kCompact, kNone };
inline constexpr int kNumScaleClasses = 6;
std::string_view scale_class_name(ScaleClass c);

// Scale class of a node under an assignment; constants map to kNone.
ScaleClass scale_class_of(const ProgramGraph& g, const RuleAssignment& a, NodeId id);

// Per-node scales from per-class scales (indexed by ScaleClass).
std::vector<double> expand_class_scales(const ProgramGraph& g, const RuleAssignment& a,
                                        std::span<const double> class_scales);

class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(NodeId node, std::vector<double> point, const std::string& what);
  NodeId node() const { return node_; }
  const std::vector<double>& point() const { return point_; }

 private:
  NodeId node_;
  std::vector<double> point_;
};

// Random stream used for an input's samples; x, y and t have fixed ids.
std::uint64_t input_stream(std::string_view name);

// Per-evaluation scratch; one per thread.
struct Workspace {
  std::vector<NodeStats> stats;
  std::vector<double> samples;  // MC node outputs, flat
  std::array<std::vector<double>, 3> operand_samples;
  std::vector<double> direct;   // direct values at the input means
  std::vector<double> adjoint;
  std::vector<InputGradient> gradients;
  RuleDiagnostics diag;
};

class SmoothedProgram {
 public:
  const ProgramGraph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  // The assignment with sampled-constant correlations filled in.
  const RuleAssignment& assignment() const { return assignment_; }
  const CompileOptions& options() const { return options_; }
  // Nodes whose requested rule lacked a closed form and fell back to the
  // compact box kernel.
  const std::vector<NodeId>& fallbacks() const { return fallbacks_; }
  std::span<const double> sigma_scales() const { return scales_; }
  std::size_t output_count() const { return graph_->outputs().size(); }

  // Copy of this program with different per-node sigma-scales.
  SmoothedProgram with_sigma_scales(std::vector<double> scales) const;

  Workspace make_workspace() const;

  // Output means for input statistics indexed like graph().inputs().
  // `pixel` keys the Monte Carlo draws.
  std::vector<double> evaluate(std::span<const NodeStats> inputs, std::uint64_t pixel = 0) const;
  void evaluate(Workspace& ws, std::span<const NodeStats> inputs, std::uint64_t pixel,
                std::span<double> out) const;
  // Statistics of every node (after sigma scaling).
  std::vector<NodeStats> evaluate_nodes(std::span<const NodeStats> inputs,
                                        std::uint64_t pixel = 0) const;

  // Deterministic per-pixel cost in model units.
  double cost_units() const { return cost_units_; }

 private:
  friend SmoothedProgram compile(GraphPtr g, const RuleAssignment& a,
                                 const CompileOptions& opts);

  enum class Mode : std::uint8_t {
    kConst, kInput, kNone, kDorn, kAdaptiveUnary, kAdaptiveBinary, kCompactUnary,
    kCompactBinary, kMonteCarlo,
  };

  struct Step {
    NodeId id = 0;
    Mode mode = Mode::kNone;
    OpCode code;
    std::array<NodeId, 3> args{-1, -1, -1};
    int arity = 0;
    std::array<bool, 3> literal{};
    RuleTag tag;
    KernelFamily kernel = KernelFamily::kBox;
    double rho_const = 0.0;
    int sample_offset = -1;  // kMonteCarlo
    std::uint64_t stream = 0;  // kInput: sample stream
    int input = -1;
  };

  void run(Workspace& ws, std::span<const NodeStats> inputs, std::uint64_t pixel) const;
  void run_step(const Step& s, Workspace& ws, std::span<const NodeStats> inputs,
                std::uint64_t pixel) const;
  void prepare_affine(Workspace& ws, std::span<const NodeStats> inputs) const;
  double affine_rho(const Step& s, Workspace& ws, std::span<const NodeStats> inputs,
                    SelectRho* select) const;
  std::span<const double> operand_samples(const Step& s, int k, int n, Workspace& ws,
                                          std::uint64_t pixel) const;

  GraphPtr graph_;
  RuleAssignment assignment_;
  CompileOptions options_;
  std::vector<Step> steps_;
  std::vector<double> scales_;
  std::vector<NodeId> fallbacks_;
  std::vector<NodeId> gradient_targets_;
  int sample_storage_ = 0;
  double cost_units_ = 0.0;
};

// Throws AssignmentError when `a` does not cover g.
SmoothedProgram compile(GraphPtr g, const RuleAssignment& a, const CompileOptions& opts = {});

// Training-time correlation constants for the given nodes (all nodes that
// take a correlation when `nodes` is empty): Pearson correlation of the
// operand pair over jittered samples around each training pixel, averaged
// over pixels.
std::map<NodeId, double> estimate_rho_constants(const ProgramGraph& g,
                                                const CompileOptions& opts,
                                                std::span<const NodeId> nodes = {});

// Input statistics of one pixel, indexed like g.inputs().
std::vector<NodeStats> pixel_inputs(const ProgramGraph& g, const PixelGrid& grid, int col,
                                    int row);

// One output channel per program output.
Image evaluate_batch(const SmoothedProgram& p, const PixelGrid& grid, int workers = 1);

// Median wall-clock milliseconds of `runs` renders after `warmup` renders.
double measure_runtime(const SmoothedProgram& p, const PixelGrid& grid, int runs = 5,
                       int warmup = 1, int workers = 1);

// Deterministic runtime estimate from the per-step cost model.
double modeled_runtime_ms(const SmoothedProgram& p, const PixelGrid& grid);

}  // namespace smoothc

#endif  // SMOOTHC_COMPILE_HPP_
