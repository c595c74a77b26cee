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

#include "smoothc/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "smoothc/parallel.hpp"
#include "smoothc/render.hpp"
#include "smoothc/rng.hpp"

namespace smoothc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::array<int, 5> kSampleCounts{2, 4, 8, 16, 32};
constexpr std::array<RuleKind, 5> kKinds{RuleKind::kDorn, RuleKind::kAdaptive,
                                         RuleKind::kMonteCarlo, RuleKind::kCompact,
                                         RuleKind::kNone};

bool unit_scales(const ClassScales& s) { return s == kUnitScales; }

std::string scales_key(const ClassScales& s) {
  std::string k;
  char buf[32];
  for (double v : s) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    k += buf;
  }
  return k;
}

std::string fitness_key(const RuleAssignment& a, const ClassScales& s) {
  return unit_scales(s) ? a.encode() : a.encode() + "|" + scales_key(s);
}

template <typename T>
T pick(std::mt19937_64& rng, const T* items, std::size_t n) {
  return items[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];
}

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Rank first, then larger crowding, then index.
bool better(const std::vector<RankInfo>& r, int a, int b) {
  if (r[a].rank != r[b].rank) return r[a].rank < r[b].rank;
  if (r[a].crowding != r[b].crowding) return r[a].crowding > r[b].crowding;
  return a < b;
}

bool dominates(const Fitness& a, const Fitness& b) {
  return a.runtime_ms <= b.runtime_ms && a.error <= b.error &&
         (a.runtime_ms < b.runtime_ms || a.error < b.error);
}

// Evaluates every individual lacking a fitness, distinct assignments in
// parallel.
void evaluate_all(FitnessEvaluator& eval, std::vector<Individual>& pop, int workers) {
  std::vector<const RuleAssignment*> todo;
  std::set<std::string> seen;
  for (const Individual& ind : pop) {
    if (ind.fitness) continue;
    std::string k = ind.assignment.encode();
    if (seen.insert(k).second) todo.push_back(&ind.assignment);
  }
  parallel_for(static_cast<int>(todo.size()), workers,
               [&](int, int i) { eval.evaluate(*todo[i]); });
  for (Individual& ind : pop) {
    if (!ind.fitness) ind.fitness = eval.evaluate(ind.assignment);
  }
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

void GAConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " not in [0, 1]");
  };
  prob(p_crossover, "p_crossover");
  prob(p_mutation, "p_mutation");
  prob(elite_fraction, "elite_fraction");
  prob(seed_crossover_p, "seed_crossover_p");
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  if (generations < 0) throw std::invalid_argument("generations must be non-negative");
  if (restarts < 1) throw std::invalid_argument("restarts must be positive");
  if (tournament < 1) throw std::invalid_argument("tournament size must be positive");
  if (static_cast<int>(std::ceil(elite_fraction * population)) >= population) {
    throw std::invalid_argument("elite fraction leaves no room for offspring");
  }
}

std::string ParetoEntry::variant_id() const {
  return "v" + hex64(fnv1a(fitness_key(assignment, scales))).substr(0, 12);
}

std::string ParetoEntry::to_json() const {
  nlohmann::ordered_json j;
  j["variant_id"] = variant_id();
  j["runtime_ms"] = runtime_ms;
  j["l2_srgb"] = error;
  j["generation"] = generation;
  j["restart"] = restart;
  nlohmann::ordered_json sc = nlohmann::ordered_json::object();
  for (int c = 0; c < kNumScaleClasses; ++c) {
    sc[std::string(scale_class_name(static_cast<ScaleClass>(c)))] = scales[c];
  }
  j["scales"] = sc;
  j["assignment"] = nlohmann::ordered_json::parse(assignment.to_json());
  return j.dump();
}

ParetoEntry ParetoEntry::from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ParetoEntry e;
    e.runtime_ms = j.at("runtime_ms").get<double>();
    e.error = j.at("l2_srgb").get<double>();
    e.generation = j.value("generation", 0);
    e.restart = j.value("restart", 0);
    if (j.contains("scales")) {
      for (int c = 0; c < kNumScaleClasses; ++c) {
        e.scales[c] = j["scales"].value(std::string(scale_class_name(static_cast<ScaleClass>(c))),
                                        1.0);
      }
    }
    e.assignment = RuleAssignment::from_json(j.at("assignment").dump());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("bad frontier entry: ") + ex.what());
  }
}

FitnessEvaluator::FitnessEvaluator(GraphPtr g, Image truth, Options opts)
    : graph_(std::move(g)), truth_(std::move(truth)), opts_(std::move(opts)) {
  if (truth_.width() != opts_.grid.width || truth_.height() != opts_.grid.height) {
    throw std::invalid_argument("ground truth does not match the fitness grid");
  }
}

Image FitnessEvaluator::render(const RuleAssignment& a, const ClassScales& scales) const {
  SmoothedProgram p = compile(graph_, a, opts_.compile);
  if (!unit_scales(scales)) {
    p = p.with_sigma_scales(expand_class_scales(*graph_, p.assignment(), scales));
  }
  return evaluate_batch(p, opts_.grid, 1);
}

Fitness FitnessEvaluator::evaluate(const RuleAssignment& a, const ClassScales& scales) {
  const std::string key = fitness_key(a, scales);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  Fitness f;
  try {
    SmoothedProgram p = compile(graph_, a, opts_.compile);
    if (!unit_scales(scales)) {
      p = p.with_sigma_scales(expand_class_scales(*graph_, p.assignment(), scales));
    }
    const Image img = evaluate_batch(p, opts_.grid, 1);
    f.error = l2_error_srgb(img, truth_);
    f.runtime_ms = opts_.measured_runtime ? measure_runtime(p, opts_.grid)
                                          : modeled_runtime_ms(p, opts_.grid);
    f.feasible = std::isfinite(f.error) && std::isfinite(f.runtime_ms);
  } catch (const std::exception&) {
    f.feasible = false;
  }
  if (!f.feasible) f = {kInf, kInf, false};
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(key, f).first->second;
}

std::size_t FitnessEvaluator::cache_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

RuleTag random_tag(Op op, RuleKind kind, std::mt19937_64& rng) {
  switch (kind) {
    case RuleKind::kDorn:
      return RuleTag::dorn();
    case RuleKind::kAdaptive: {
      if (!uses_rho(op)) return RuleTag::adaptive();
      static constexpr RhoMode kModes[] = {RhoMode::kZero, RhoMode::kSampled, RhoMode::kAffine};
      return RuleTag::adaptive(pick(rng, kModes, 3));
    }
    case RuleKind::kMonteCarlo:
      return RuleTag::mc(pick(rng, kSampleCounts.data(), kSampleCounts.size()));
    case RuleKind::kCompact: {
      static constexpr KernelFamily kKernels[] = {KernelFamily::kBox, KernelFamily::kTent};
      return RuleTag::compact(pick(rng, kKernels, 2));
    }
    case RuleKind::kNone:
      return RuleTag::none();
  }
  return RuleTag::none();
}

RuleAssignment random_assignment(const ProgramGraph& g, std::mt19937_64& rng) {
  RuleAssignment a;
  for (NodeId id : g.expression_nodes()) {
    const std::vector<RuleTag> opts = rule_options(g.node(id).op);
    a.tags[id] = pick(rng, opts.data(), opts.size());
  }
  return a;
}

std::vector<Individual> seed_population(const ProgramGraph& g, const GAConfig& cfg,
                                        std::mt19937_64& rng) {
  std::vector<Individual> pop;
  const std::array<RuleTag, 5> seeds{RuleTag::dorn(), RuleTag::adaptive(), RuleTag::mc(8),
                                     RuleTag::compact(KernelFamily::kBox), RuleTag::none()};
  for (const RuleTag& t : seeds) {
    if (static_cast<int>(pop.size()) == cfg.population) break;
    pop.push_back({RuleAssignment::uniform(g, t), std::nullopt, 0});
  }
  const std::size_t n_seeds = pop.size();
  for (std::size_t i = 0; i < n_seeds; ++i) {
    for (std::size_t j = i + 1; j < n_seeds; ++j) {
      if (static_cast<int>(pop.size()) == cfg.population) break;
      Individual child{pop[i].assignment, std::nullopt, 0};
      for (auto& [id, tag] : child.assignment.tags) {
        if (uniform01(rng) >= cfg.seed_crossover_p) tag = pop[j].assignment.at(id);
      }
      pop.push_back(std::move(child));
    }
  }
  while (static_cast<int>(pop.size()) < cfg.population) {
    pop.push_back({random_assignment(g, rng), std::nullopt, 0});
  }
  return pop;
}

Individual mutate_at(const ProgramGraph& g, const Individual& ind, MutationSpan span,
                     std::size_t start, RuleKind kind, std::mt19937_64& rng) {
  const std::vector<NodeId> order = dfs_order(g);
  if (order.empty()) return ind;
  start = std::min(start, order.size() - 1);
  std::vector<NodeId> targets;
  if (span == MutationSpan::kSubtree) {
    for (NodeId id : subtree_nodes(g, {order[start], true})) {
      if (ind.assignment.tags.count(id)) targets.push_back(id);
    }
  } else {
    const std::size_t len = span == MutationSpan::kOne ? 1 : span == MutationSpan::kTwo ? 2 : 4;
    for (std::size_t k = start; k < std::min(order.size(), start + len); ++k) {
      targets.push_back(order[k]);
    }
  }
  Individual child{ind.assignment, std::nullopt, ind.born};
  // One rule for the whole span; parameters are drawn once per op family
  // so that the span stays uniform where ops allow it.
  const RuleTag base = random_tag(Op::kAdd, kind, rng);
  for (NodeId id : targets) {
    RuleTag t = base;
    if (t.kind == RuleKind::kAdaptive && !uses_rho(g.node(id).op)) t = RuleTag::adaptive();
    child.assignment.tags[id] = t;
    child.assignment.rho_constants.erase(id);
  }
  return child;
}

Individual mutate(const ProgramGraph& g, const Individual& ind, std::mt19937_64& rng) {
  const std::size_t n = dfs_order(g).size();
  if (n == 0) return ind;
  static constexpr MutationSpan kSpans[] = {MutationSpan::kOne, MutationSpan::kTwo,
                                            MutationSpan::kFour, MutationSpan::kSubtree};
  const MutationSpan span = pick(rng, kSpans, 4);
  const std::size_t start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  const RuleKind kind = pick(rng, kKinds.data(), kKinds.size());
  return mutate_at(g, ind, span, start, kind, rng);
}

Individual crossover_at(const ProgramGraph& g, const Individual& a, const Individual& b,
                        std::size_t point) {
  std::set<NodeId> ka, kb;
  for (const auto& [id, t] : a.assignment.tags) ka.insert(id);
  for (const auto& [id, t] : b.assignment.tags) kb.insert(id);
  if (ka != kb) throw AssignmentError("crossover of assignments over different nodes");
  const std::vector<NodeId> order = dfs_order(g);
  Individual child{a.assignment, std::nullopt, std::max(a.born, b.born)};
  for (std::size_t k = std::min(point, order.size()); k < order.size(); ++k) {
    const NodeId id = order[k];
    child.assignment.tags[id] = b.assignment.at(id);
    child.assignment.rho_constants.erase(id);
    if (auto it = b.assignment.rho_constants.find(id); it != b.assignment.rho_constants.end()) {
      child.assignment.rho_constants[id] = it->second;
    }
  }
  return child;
}

Individual crossover(const ProgramGraph& g, const Individual& a, const Individual& b,
                     std::mt19937_64& rng) {
  const std::size_t n = dfs_order(g).size();
  return crossover_at(g, a, b, std::uniform_int_distribution<std::size_t>(0, n)(rng));
}

std::vector<RankInfo> rank_population(const std::vector<Fitness>& f) {
  const int n = static_cast<int>(f.size());
  std::vector<RankInfo> out(n);
  std::vector<int> remaining;
  for (int i = 0; i < n; ++i) {
    if (f[i].feasible) remaining.push_back(i);
  }
  int rank = 0;
  while (!remaining.empty()) {
    std::vector<int> front, rest;
    for (int i : remaining) {
      bool dominated = false;
      for (int j : remaining) {
        if (dominates(f[j], f[i])) {
          dominated = true;
          break;
        }
      }
      (dominated ? rest : front).push_back(i);
    }
    for (int i : front) out[i] = {rank, 0.0};
    // Crowding distance within the front, per objective.
    for (int obj = 0; obj < 2; ++obj) {
      auto val = [&](int i) { return obj == 0 ? f[i].runtime_ms : f[i].error; };
      std::vector<int> s = front;
      std::sort(s.begin(), s.end(), [&](int a, int b) {
        return val(a) != val(b) ? val(a) < val(b) : a < b;
      });
      const double span = val(s.back()) - val(s.front());
      out[s.front()].crowding = out[s.back()].crowding = kInf;
      if (span <= 0.0) continue;
      for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        out[s[k]].crowding += (val(s[k + 1]) - val(s[k - 1])) / span;
      }
    }
    remaining = std::move(rest);
    ++rank;
  }
  for (int i = 0; i < n; ++i) {
    if (!f[i].feasible) out[i] = {rank, 0.0};
  }
  return out;
}

std::vector<ParetoEntry> pareto_front(std::vector<ParetoEntry> entries) {
  std::erase_if(entries, [](const ParetoEntry& e) {
    return !std::isfinite(e.runtime_ms) || !std::isfinite(e.error);
  });
  std::vector<std::string> keys;
  std::vector<std::size_t> idx(entries.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (const ParetoEntry& e : entries) keys.push_back(fitness_key(e.assignment, e.scales));
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const ParetoEntry &x = entries[a], &y = entries[b];
    if (x.runtime_ms != y.runtime_ms) return x.runtime_ms < y.runtime_ms;
    if (x.error != y.error) return x.error < y.error;
    return keys[a] < keys[b];
  });
  std::vector<ParetoEntry> out;
  double best = kInf;
  for (std::size_t i : idx) {
    if (entries[i].error < best) {
      best = entries[i].error;
      out.push_back(entries[i]);
    }
  }
  return out;
}

EvolveResult evolve(FitnessEvaluator& eval, const GAConfig& cfg) {
  cfg.validate();
  const ProgramGraph& g = eval.graph();
  EvolveResult result;
  const std::size_t cache_before = eval.cache_size();
  const int n_elite = static_cast<int>(std::ceil(cfg.elite_fraction * cfg.population));
  std::vector<ParetoEntry> all;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::mt19937_64 seed_rng(hash_key(cfg.seed, static_cast<std::uint64_t>(restart), 0));
    std::vector<Individual> pop = seed_population(g, cfg, seed_rng);
    std::vector<ParetoEntry> archive;
    std::set<std::string> archived;
    std::vector<double> best_by_gen;

    auto record = [&](int gen) {
      double best = kInf;
      for (const Individual& ind : pop) {
        const Fitness& f = *ind.fitness;
        if (!f.feasible) continue;
        best = std::min(best, f.error);
        if (archived.insert(ind.assignment.encode()).second) {
          ParetoEntry e;
          e.runtime_ms = f.runtime_ms;
          e.error = f.error;
          e.assignment = ind.assignment;
          e.generation = gen;
          e.restart = restart;
          archive.push_back(std::move(e));
        }
      }
      best_by_gen.push_back(best);
    };

    evaluate_all(eval, pop, cfg.workers);
    record(0);

    for (int gen = 1; gen <= cfg.generations; ++gen) {
      std::mt19937_64 rng(hash_key(cfg.seed, static_cast<std::uint64_t>(restart),
                                   static_cast<std::uint64_t>(gen)));
      std::vector<Fitness> fit;
      for (const Individual& ind : pop) fit.push_back(*ind.fitness);
      const std::vector<RankInfo> ranks = rank_population(fit);
      std::vector<int> order(pop.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return better(ranks, a, b); });

      auto tournament = [&]() {
        std::uniform_int_distribution<int> u(0, static_cast<int>(pop.size()) - 1);
        int best = u(rng);
        for (int k = 1; k < cfg.tournament; ++k) {
          const int c = u(rng);
          if (better(ranks, c, best)) best = c;
        }
        return best;
      };

      std::vector<Individual> next;
      for (int k = 0; k < n_elite; ++k) next.push_back(pop[order[k]]);
      while (static_cast<int>(next.size()) < cfg.population) {
        Individual child = pop[tournament()];
        if (uniform01(rng) < cfg.p_crossover) {
          child = crossover(g, child, pop[tournament()], rng);
        }
        if (uniform01(rng) < cfg.p_mutation) child = mutate(g, child, rng);
        if (!child.fitness) child.born = gen;
        next.push_back(std::move(child));
      }
      pop = std::move(next);
      evaluate_all(eval, pop, cfg.workers);
      record(gen);
    }

    result.best_error.push_back(std::move(best_by_gen));
    for (ParetoEntry& e : pareto_front(std::move(archive))) all.push_back(std::move(e));
  }
  result.frontier = pareto_front(std::move(all));
  result.evaluations = eval.cache_size() - cache_before;
  return result;
}

std::vector<ParetoEntry> exhaustive_frontier(FitnessEvaluator& eval, int workers,
                                             std::size_t max_variants) {
  const ProgramGraph& g = eval.graph();
  std::vector<NodeId> nodes(g.expression_nodes().begin(), g.expression_nodes().end());
  std::vector<std::vector<RuleTag>> options;
  std::size_t total = 1;
  for (NodeId id : nodes) {
    options.push_back(rule_options(g.node(id).op));
    total *= options.back().size();
    if (total > max_variants) throw std::invalid_argument("too many assignments to enumerate");
  }
  std::vector<RuleAssignment> all(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t r = k;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      all[k].tags[nodes[i]] = options[i][r % options[i].size()];
      r /= options[i].size();
    }
  }
  std::vector<Fitness> fit(total);
  parallel_for(static_cast<int>(total), workers,
               [&](int, int k) { fit[k] = eval.evaluate(all[k]); });
  std::vector<ParetoEntry> entries;
  for (std::size_t k = 0; k < total; ++k) {
    if (!fit[k].feasible) continue;
    ParetoEntry e;
    e.runtime_ms = fit[k].runtime_ms;
    e.error = fit[k].error;
    e.assignment = all[k];
    entries.push_back(std::move(e));
  }
  return pareto_front(std::move(entries));
}

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step, int max_iterations,
                          double tolerance) {
  const std::size_t n = x0.size();
  struct Vertex {
    std::vector<double> x;
    double v;
  };
  std::vector<Vertex> s;
  s.push_back({x0, f(x0)});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = x0;
    x[i] += step;
    s.push_back({x, f(x)});
  }
  auto sort = [&] {
    std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.v < b.v; });
  };
  auto along = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (w[i] - c[i]);
    return x;
  };
  int it = 0;
  for (; it < max_iterations; ++it) {
    sort();
    if (n == 0 || s.back().v - s.front().v <= tolerance) break;
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) c[i] += s[k].x[i] / static_cast<double>(n);
    }
    Vertex& worst = s.back();
    const std::vector<double> xr = along(c, worst.x, -1.0);
    const double vr = f(xr);
    if (vr < s.front().v) {
      const std::vector<double> xe = along(c, worst.x, -2.0);
      const double ve = f(xe);
      worst = ve < vr ? Vertex{xe, ve} : Vertex{xr, vr};
    } else if (vr < s[n - 1].v) {
      worst = {xr, vr};
    } else {
      const bool outside = vr < worst.v;
      const std::vector<double> xc = outside ? along(c, xr, 0.5) : along(c, worst.x, 0.5);
      const double vc = f(xc);
      if (vc < std::min(vr, worst.v)) {
        worst = {xc, vc};
      } else {
        for (std::size_t k = 1; k <= n; ++k) {
          s[k].x = along(s[0].x, s[k].x, 0.5);
          s[k].v = f(s[k].x);
        }
      }
    }
  }
  sort();
  return {s.front().x, s.front().v, it};
}

ParetoEntry refine_sigma_scales(const ParetoEntry& entry, FitnessEvaluator& eval,
                                const RefineOptions& opts) {
  const ProgramGraph& g = eval.graph();
  std::set<int> present{static_cast<int>(ScaleClass::kInput)};
  for (NodeId id : g.expression_nodes()) {
    present.insert(static_cast<int>(scale_class_of(g, entry.assignment, id)));
  }
  present.erase(static_cast<int>(ScaleClass::kNone));
  if (!opts.classes.empty()) {
    std::set<int> wanted;
    for (ScaleClass c : opts.classes) wanted.insert(static_cast<int>(c));
    std::erase_if(present, [&](int c) { return !wanted.count(c); });
  }
  const std::vector<int> classes(present.begin(), present.end());

  auto scales_of = [&](const std::vector<double>& x) {
    ClassScales s = entry.scales;
    for (std::size_t i = 0; i < classes.size(); ++i) s[classes[i]] = std::exp(x[i]);
    return s;
  };
  auto objective = [&](const std::vector<double>& x) {
    const Fitness f = eval.evaluate(entry.assignment, scales_of(x));
    return f.feasible ? f.error : kInf;
  };
  std::vector<double> x0;
  for (int c : classes) x0.push_back(std::log(entry.scales[c]));
  const double base = objective(x0);
  const SimplexResult r =
      nelder_mead(objective, x0, opts.initial_step, opts.max_iterations, opts.tolerance);
  if (!(r.value < base)) return entry;
  ParetoEntry out = entry;
  out.scales = scales_of(r.x);
  const Fitness f = eval.evaluate(out.assignment, out.scales);
  out.error = f.error;
  out.runtime_ms = f.runtime_ms;
  return out;
}

RuleUsage rule_usage(const ProgramGraph& g, const RuleAssignment& a) {
  RuleUsage u{};
  const auto nodes = g.expression_nodes();
  if (nodes.empty()) return u;
  for (NodeId id : nodes) u[static_cast<int>(a.at(id).kind)] += 1.0;
  for (double& v : u) v *= 100.0 / static_cast<double>(nodes.size());
  return u;
}

RuleUsageTable rule_usage_stats(const std::vector<ShaderFrontier>& shaders) {
  RuleUsageTable t;
  int counted = 0;
  auto add = [](RuleUsage& acc, const RuleUsage& u, double w) {
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * u[k];
  };
  for (const ShaderFrontier& s : shaders) {
    if (s.frontier.empty() || s.graph == nullptr) continue;
    std::vector<ParetoEntry> f = s.frontier;
    std::stable_sort(f.begin(), f.end(), [](const ParetoEntry& a, const ParetoEntry& b) {
      return a.runtime_ms < b.runtime_ms;
    });
    RuleUsage mean{};
    for (const ParetoEntry& e : f) {
      const RuleUsage u = rule_usage(*s.graph, e.assignment);
      t.per_variant.push_back(u);
      add(mean, u, 1.0 / static_cast<double>(f.size()));
    }
    add(t.aggregate, mean, 1.0);
    add(t.fastest, rule_usage(*s.graph, f.front().assignment), 1.0);
    add(t.median, rule_usage(*s.graph, f[f.size() / 2].assignment), 1.0);
    add(t.slowest, rule_usage(*s.graph, f.back().assignment), 1.0);
    ++counted;
  }
  if (counted > 0) {
    for (RuleUsage* u : {&t.aggregate, &t.fastest, &t.median, &t.slowest}) {
      for (double& v : *u) v /= counted;
    }
  }
  return t;
}

std::string rule_usage_markdown(const RuleUsageTable& t) {
  std::string s = "| slice |";
  for (RuleKind k : kKinds) s += " " + std::string(rule_kind_name(k)) + " |";
  s += "\n|---|---|---|---|---|---|\n";
  auto row = [&](const char* name, const RuleUsage& u) {
    s += "| ";
    s += name;
    s += " |";
    char buf[32];
    for (RuleKind k : kKinds) {
      std::snprintf(buf, sizeof(buf), " %.1f%% |", u[static_cast<int>(k)]);
      s += buf;
    }
    s += '\n';
  };
  row("fastest", t.fastest);
  row("median", t.median);
  row("slowest", t.slowest);
  row("all", t.aggregate);
  return s;
}

std::string frontier_jsonl(const std::vector<ParetoEntry>& frontier) {
  std::string s;
  for (const ParetoEntry& e : frontier) s += e.to_json() + "\n";
  return s;
}

std::string frontier_csv(const std::vector<ParetoEntry>& frontier, double baseline_ms) {
  std::vector<MetricsRow> rows;
  for (const ParetoEntry& e : frontier) {
    rows.push_back({e.variant_id(), e.runtime_ms,
                    baseline_ms > 0.0 ? e.runtime_ms / baseline_ms : 0.0, e.error});
  }
  return metrics_csv(rows);
}

}  // namespace smoothc
