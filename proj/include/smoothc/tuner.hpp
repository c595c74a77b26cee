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

// Genetic search over rule assignments for a (runtime, error) Pareto
// frontier, and simplex refinement of sigma-scales.

#ifndef SMOOTHC_TUNER_HPP_
#define SMOOTHC_TUNER_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "smoothc/compile.hpp"
#include "smoothc/image.hpp"
#include "smoothc/rules.hpp"

namespace smoothc {

struct GAConfig {
  int population = 40;
  int generations = 20;
  int restarts = 3;
  double p_crossover = 0.4;
  double elite_fraction = 0.25;
  double p_mutation = 0.35;
  int tournament = 4;
  double seed_crossover_p = 0.5;  // per-node pick when crossing seed individuals
  std::uint64_t seed = 1;
  int workers = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

struct Fitness {
  double runtime_ms = 0.0;
  double error = 0.0;
  bool feasible = true;
};

struct Individual {
  RuleAssignment assignment;
  std::optional<Fitness> fitness;  // reset by mutate and crossover
  int born = 0;                    // generation
};

// Per-class sigma-scales, indexed by ScaleClass.
using ClassScales = std::array<double, kNumScaleClasses>;
inline constexpr ClassScales kUnitScales{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

struct ParetoEntry {
  double runtime_ms = 0.0;
  double error = 0.0;
  RuleAssignment assignment;
  ClassScales scales = kUnitScales;
  int generation = 0;
  int restart = 0;

  // Stable id derived from the assignment and scales.
  std::string variant_id() const;
  std::string to_json() const;  // one line
  static ParetoEntry from_json(std::string_view line);
};

// Renders a shader variant against a fixed ground truth. Results are cached
// by assignment and scales; safe to call from several threads.
class FitnessEvaluator {
 public:
  struct Options {
    PixelGrid grid;
    CompileOptions compile;
    // Wall-clock runtime instead of the deterministic cost model.
    bool measured_runtime = false;
  };

  FitnessEvaluator(GraphPtr g, Image truth, Options opts);

  const ProgramGraph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }
  const Options& options() const { return opts_; }
  const Image& truth() const { return truth_; }

  Fitness evaluate(const RuleAssignment& a, const ClassScales& scales = kUnitScales);
  // The rendered image of a variant; throws on evaluation failure.
  Image render(const RuleAssignment& a, const ClassScales& scales = kUnitScales) const;
  std::size_t cache_size() const;

 private:
  GraphPtr graph_;
  Image truth_;
  Options opts_;
  mutable std::mutex mu_;
  std::map<std::string, Fitness> cache_;
};

// One all-X individual per rule kind, crossovers of those, then random
// assignments up to the population size.
std::vector<Individual> seed_population(const ProgramGraph& g, const GAConfig& cfg,
                                        std::mt19937_64& rng);
RuleAssignment random_assignment(const ProgramGraph& g, std::mt19937_64& rng);

// A random rule of the given kind, valid for op.
RuleTag random_tag(Op op, RuleKind kind, std::mt19937_64& rng);

enum class MutationSpan : std::uint8_t { kOne, kTwo, kFour, kSubtree };

// Retags the nodes selected by span starting at depth-first position
// `start` (clipped at the end; the subtree of that node for kSubtree) with
// one freshly drawn rule kind.
Individual mutate_at(const ProgramGraph& g, const Individual& ind, MutationSpan span,
                     std::size_t start, RuleKind kind, std::mt19937_64& rng);
Individual mutate(const ProgramGraph& g, const Individual& ind, std::mt19937_64& rng);

// Single point over depth-first order: nodes before `point` from a, the
// rest from b. Throws AssignmentError when a and b cover different nodes.
Individual crossover_at(const ProgramGraph& g, const Individual& a, const Individual& b,
                        std::size_t point);
Individual crossover(const ProgramGraph& g, const Individual& a, const Individual& b,
                     std::mt19937_64& rng);

// Non-dominated sorting rank (0 = front) and crowding distance; infeasible
// individuals take the last rank.
struct RankInfo {
  int rank = 0;
  double crowding = 0.0;
};
std::vector<RankInfo> rank_population(const std::vector<Fitness>& f);

// Sorted by runtime with strictly decreasing error. Ties on both objectives
// keep the lexicographically smallest encoding.
std::vector<ParetoEntry> pareto_front(std::vector<ParetoEntry> entries);

struct EvolveResult {
  std::vector<ParetoEntry> frontier;
  std::size_t evaluations = 0;  // distinct variants rendered
  // Lowest feasible error in the population, [restart][generation].
  std::vector<std::vector<double>> best_error;
};

EvolveResult evolve(FitnessEvaluator& eval, const GAConfig& cfg);

// Frontier over every assignment; throws std::invalid_argument when there
// are more than max_variants.
std::vector<ParetoEntry> exhaustive_frontier(FitnessEvaluator& eval, int workers = 1,
                                             std::size_t max_variants = 100000);

struct RefineOptions {
  int max_iterations = 200;
  double tolerance = 1e-4;  // on error, across the simplex
  double initial_step = 0.5;  // in log-scale
  std::vector<ScaleClass> classes;  // empty: every class present
};

// Simplex search over log per-class scales of the classes present in the
// entry. The result never has a higher error than the input.
ParetoEntry refine_sigma_scales(const ParetoEntry& entry, FitnessEvaluator& eval,
                                const RefineOptions& opts = {});

// Percentage of expression nodes per rule kind, indexed by RuleKind.
using RuleUsage = std::array<double, 5>;
RuleUsage rule_usage(const ProgramGraph& g, const RuleAssignment& a);

struct RuleUsageTable {
  std::vector<RuleUsage> per_variant;
  RuleUsage aggregate{};
  RuleUsage fastest{};
  RuleUsage median{};
  RuleUsage slowest{};
};

struct ShaderFrontier {
  const ProgramGraph* graph = nullptr;
  std::vector<ParetoEntry> frontier;
};

// Each shader contributes equally to the aggregate and to the slices.
RuleUsageTable rule_usage_stats(const std::vector<ShaderFrontier>& shaders);
std::string rule_usage_markdown(const RuleUsageTable& t);

std::string frontier_jsonl(const std::vector<ParetoEntry>& frontier);
// Metrics CSV with ratios relative to baseline_ms.
std::string frontier_csv(const std::vector<ParetoEntry>& frontier, double baseline_ms);

// Minimizes f with a Nelder-Mead simplex from x0; returns the best vertex.
struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_iterations,
                          double tolerance);

}  // namespace smoothc

#endif  // SMOOTHC_TUNER_HPP_
