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

#include "smoothc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "smoothc/denoise.hpp"
#include "smoothc/oracle.hpp"
#include "smoothc/render.hpp"
#include "smoothc/tuner.hpp"

namespace smoothc {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Heatmaps share one scale so they compare across variants.
constexpr double kHeatmapMax = 0.25;

struct Size {
  int width = 0;
  int height = 0;
};

Size parse_size(const std::string& s) {
  int w = 0, h = 0;
  char x = 0, extra = 0;
  if (std::sscanf(s.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X') ||
      w <= 0 || h <= 0) {
    throw CLI::ValidationError("--size", "expected WxH with positive integers, got '" + s + "'");
  }
  return {w, h};
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct LoadedShader {
  std::string name;
  GraphPtr graph;
};

// A built-in name, or a path to a DSL file.
LoadedShader load_shader(const std::string& name_or_path) {
  for (const Shader& s : builtin_shaders()) {
    if (s.name == name_or_path) return {s.name, s.graph};
  }
  if (fs::is_regular_file(name_or_path)) {
    const std::string name = fs::path(name_or_path).stem().string();
    return {name, parse_shared(read_file(name_or_path), name)};
  }
  throw std::runtime_error("unknown shader '" + name_or_path + "' (not a built-in name or a file)");
}

RuleAssignment load_assignment(const ProgramGraph& g, const std::string& file,
                               const std::string& rule) {
  if (!file.empty()) return RuleAssignment::from_json(read_file(file));
  return RuleAssignment::uniform(g, RuleTag::parse(rule));
}

void ensure_parent(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void save_png(const std::string& path, const Image& img) {
  ensure_parent(path);
  write_png(path, img);
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Ground truth render plus the JSON sidecar describing it.
Image ground_truth(const LoadedShader& s, const PixelGrid& grid, int spp, std::uint64_t seed,
                   int workers, const std::string& png_path) {
  Image truth = supersample_render(*s.graph, grid, spp, seed, workers);
  if (!png_path.empty()) {
    save_png(png_path, truth);
    json side;
    side["shader"] = s.name;
    side["shader_hash"] = hex(structural_hash(*s.graph));
    side["seed"] = seed;
    side["spp"] = spp;
    side["width"] = grid.width;
    side["height"] = grid.height;
    side["spatial_sigma"] = grid.spatial_sigma;
    side["t"] = grid.t;
    side["filter"] = "gaussian";
    write_text_file(fs::path(png_path).replace_extension(".json").string(), side.dump(2) + "\n");
  }
  return truth;
}

double runtime_of(const SmoothedProgram& p, const PixelGrid& grid, bool measured) {
  return measured ? measure_runtime(p, grid) : modeled_runtime_ms(p, grid);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Common {
  std::string shader;
  std::string size;
  std::uint64_t seed = 1;
  int spp = kGroundTruthSpp;
  std::string out;
  std::string assignment;
  std::string rule = "adaptive:zero";
  double sigma = 0.5;
  double t = 0.0;
  int workers = 1;
};

int cmd_compile(const Common& o, bool measured, std::ostream& out) {
  const LoadedShader s = load_shader(o.shader);
  const Size sz = parse_size(o.size);
  const PixelGrid grid = make_grid(sz.width, sz.height, o.t, o.sigma);
  const RuleAssignment a = load_assignment(*s.graph, o.assignment, o.rule);
  CompileOptions copts;
  copts.seed = o.seed;
  const SmoothedProgram p = compile(s.graph, a, copts);
  const SmoothedProgram none = compile(s.graph, RuleAssignment::uniform(*s.graph, RuleTag::none()));
  const fs::path dir = fs::path(o.out) / s.name;
  const Image truth =
      ground_truth(s, grid, o.spp, o.seed, o.workers, (dir / "ground_truth.png").string());
  const Image img = evaluate_batch(p, grid, o.workers);
  const Image base = evaluate_batch(none, grid, o.workers);
  const double rt = runtime_of(p, grid, measured), rt0 = runtime_of(none, grid, measured);
  const double l2 = l2_error_srgb(img, truth), l2_0 = l2_error_srgb(base, truth);

  save_png((dir / "variant.png").string(), img);
  save_png((dir / "heatmap.png").string(), colorize_heatmap(error_heatmap(img, truth), kHeatmapMax));
  write_text_file((dir / "assignment.json").string(), p.assignment().to_json() + "\n");
  write_text_file((dir / "metrics.csv").string(),
                  metrics_csv({{"no_aa", rt0, 1.0, l2_0}, {"variant", rt, rt / rt0, l2}}));
  json rep;
  rep["shader"] = s.name;
  rep["width"] = sz.width;
  rep["height"] = sz.height;
  rep["l2_srgb"] = l2;
  rep["runtime_ms"] = rt;
  rep["ratio"] = rt / rt0;
  rep["no_aa_l2_srgb"] = l2_0;
  rep["runtime_model"] = measured ? "measured" : "cost model";
  rep["heatmap_max"] = kHeatmapMax;
  json fb = json::array();
  for (NodeId id : p.fallbacks()) fb.push_back(id);
  rep["fallback_nodes"] = fb;
  write_text_file((dir / "report.json").string(), rep.dump(2) + "\n");
  out << s.name << ": l2_srgb " << fmt(l2) << " (no AA " << fmt(l2_0) << "), runtime "
      << fmt(rt) << " ms, ratio " << fmt(rt / rt0) << "\n";
  for (NodeId id : p.fallbacks()) {
    out << "  node " << id << " fell back to the compact box kernel\n";
  }
  return kExitOk;
}

int cmd_render(const Common& o, int frames, double dt, std::ostream& out) {
  const LoadedShader s = load_shader(o.shader);
  const Size sz = parse_size(o.size);
  if (o.out.empty()) throw CLI::ValidationError("--out", "render needs an output file");
  if (frames < 1) throw CLI::ValidationError("--frames", "must be positive");
  for (int f = 0; f < frames; ++f) {
    std::string path = o.out;
    if (frames > 1) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "_%04d", f);
      const fs::path p(o.out);
      path = (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
    }
    const PixelGrid grid = make_grid(sz.width, sz.height, o.t + f * dt, o.sigma);
    if (o.spp > 0) {
      ground_truth(s, grid, o.spp, o.seed, o.workers, path);
    } else {
      CompileOptions copts;
      copts.seed = o.seed;
      const SmoothedProgram p =
          compile(s.graph, load_assignment(*s.graph, o.assignment, o.rule), copts);
      save_png(path, evaluate_batch(p, grid, o.workers));
    }
    out << "wrote " << path << "\n";
  }
  return kExitOk;
}

struct TuneArgs {
  int population = 40;
  int generations = 20;
  int restarts = 3;
  bool refine = false;
  bool measured = false;
};

int cmd_tune(const Common& o, const TuneArgs& ta, std::ostream& out) {
  const LoadedShader s = load_shader(o.shader);
  const Size sz = parse_size(o.size);
  const PixelGrid grid = make_grid(sz.width, sz.height, o.t, o.sigma);
  const fs::path dir = fs::path(o.out) / s.name;
  const Image truth =
      ground_truth(s, grid, o.spp, o.seed, o.workers, (dir / "ground_truth.png").string());

  FitnessEvaluator::Options eo;
  eo.grid = grid;
  eo.compile.seed = o.seed;
  eo.measured_runtime = ta.measured;
  FitnessEvaluator eval(s.graph, truth, eo);
  GAConfig cfg;
  cfg.population = ta.population;
  cfg.generations = ta.generations;
  cfg.restarts = ta.restarts;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  EvolveResult r = evolve(eval, cfg);
  if (ta.refine) {
    std::vector<ParetoEntry> refined;
    for (const ParetoEntry& e : r.frontier) refined.push_back(refine_sigma_scales(e, eval));
    r.frontier = pareto_front(std::move(refined));
  }

  const Fitness none = eval.evaluate(RuleAssignment::uniform(*s.graph, RuleTag::none()));
  std::vector<MetricsRow> base{{"no_aa", none.runtime_ms, 1.0, none.error}};
  std::vector<PlotPoint> msaa;
  for (int n : {2, 4, 8, 16, 32}) {
    const Fitness f = eval.evaluate(RuleAssignment::uniform(*s.graph, RuleTag::mc(n)));
    base.push_back({"msaa" + std::to_string(n), f.runtime_ms, f.runtime_ms / none.runtime_ms,
                    f.error});
    msaa.push_back({f.runtime_ms / none.runtime_ms, f.error});
  }
  std::vector<PlotPoint> front;
  for (const ParetoEntry& e : r.frontier) front.push_back({e.runtime_ms / none.runtime_ms, e.error});

  write_text_file((dir / "frontier.jsonl").string(), frontier_jsonl(r.frontier));
  write_text_file((dir / "frontier.csv").string(), frontier_csv(r.frontier, none.runtime_ms));
  write_text_file((dir / "baselines.csv").string(), metrics_csv(base));
  write_text_file((dir / "pareto.svg").string(),
                  pareto_svg(s.name + " (" + std::to_string(sz.width) + "x" +
                                 std::to_string(sz.height) + ")",
                             front, msaa, {1.0, none.error}));
  write_text_file((dir / "rule_usage.md").string(),
                  rule_usage_markdown(rule_usage_stats({{s.graph.get(), r.frontier}})));
  out << s.name << ": " << r.frontier.size() << " frontier variants from " << r.evaluations
      << " evaluations; no-AA l2 " << fmt(none.error) << "\n";
  for (const ParetoEntry& e : r.frontier) {
    out << "  " << e.variant_id() << "  ratio " << fmt(e.runtime_ms / none.runtime_ms)
        << "  l2 " << fmt(e.error) << "\n";
  }
  return kExitOk;
}

int cmd_table_check(int nx, int ns, std::ostream& out) {
  double worst = 0.0;
  for (const TableRow& row : table_rows()) {
    const TableRowReport rep = check_table_row(row, nx, ns);
    worst = std::max(worst, rep.max_rel_error);
    char line[160];
    std::snprintf(line, sizeof(line), "%-28s max_rel_error %.3e  (x=%.4g, sigma=%.4g)\n",
                  row.name.c_str(), rep.max_rel_error, rep.worst_x, rep.worst_sigma);
    out << line;
  }
  out << "worst " << fmt(worst) << "\n";
  return worst <= 1e-6 ? kExitOk : kExitFailure;
}

int cmd_denoise(const std::string& in, const std::string& path, const DenoiseConfig& cfg,
                std::ostream& out) {
  if (path.empty()) throw CLI::ValidationError("--out", "denoise needs an output file");
  const Image img = read_png(in);
  save_png(path, nlmeans_denoise(img, cfg));
  out << "wrote " << path << "\n";
  return kExitOk;
}

int cmd_gallery(const Common& o, std::ostream& out) {
  const Size sz = parse_size(o.size);
  const fs::path dir = o.out;
  std::vector<MetricsRow> rows;
  std::string index = "# smoothc gallery\n\nResolution " + std::to_string(sz.width) + "x" +
                      std::to_string(sz.height) + ", ground truth " + std::to_string(o.spp) +
                      " samples per pixel, seed " + std::to_string(o.seed) + ".\n\n" +
                      "| shader | variant | ratio | l2_srgb |\n|---|---|---|---|\n";
  for (const Shader& sh : builtin_shaders()) {
    const LoadedShader s{sh.name, sh.graph};
    const PixelGrid grid = make_grid(sz.width, sz.height, o.t, o.sigma);
    const fs::path sd = dir / s.name;
    const Image truth =
        ground_truth(s, grid, o.spp, o.seed, o.workers, (sd / "ground_truth.png").string());
    const SmoothedProgram none =
        compile(s.graph, RuleAssignment::uniform(*s.graph, RuleTag::none()));
    const double rt0 = modeled_runtime_ms(none, grid);
    auto emit = [&](const std::string& variant, const Image& img, double rt) {
      const double l2 = l2_error_srgb(img, truth);
      save_png((sd / (variant + ".png")).string(), img);
      save_png((sd / (variant + "_heatmap.png")).string(),
               colorize_heatmap(error_heatmap(img, truth), kHeatmapMax));
      rows.push_back({s.name + "/" + variant, rt, rt / rt0, l2});
      index += "| " + s.name + " | " + variant + " | " + fmt(rt / rt0) + " | " + fmt(l2) + " |\n";
    };
    emit("no_aa", evaluate_batch(none, grid, o.workers), rt0);
    CompileOptions copts;
    copts.seed = o.seed;
    for (RuleTag tag : {RuleTag::adaptive(), RuleTag::dorn()}) {
      const SmoothedProgram p = compile(s.graph, RuleAssignment::uniform(*s.graph, tag), copts);
      std::string name = tag.str();
      for (char& c : name) c = c == ':' ? '_' : c;
      emit(name, evaluate_batch(p, grid, o.workers), modeled_runtime_ms(p, grid));
    }
    const SmoothedProgram mc8 =
        compile(s.graph, RuleAssignment::uniform(*s.graph, RuleTag::mc(8)), copts);
    emit("msaa8", msaa_render(*s.graph, sz.width, sz.height, 8, o.seed, o.t, o.workers),
         modeled_runtime_ms(mc8, grid));
    write_text_file((sd / "source.smdl").string(), sh.source);
    out << s.name << " done\n";
  }
  write_text_file((dir / "metrics.csv").string(), metrics_csv(rows));
  write_text_file((dir / "index.md").string(), index);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"smoothc: compiler for bandlimited (antialiased) procedural shaders"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  Common o;
  auto add_shader = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--shader", o.shader, "built-in shader name or DSL file");
    if (required) opt->required();
  };
  auto add_common = [&](CLI::App* c, const std::string& size) {
    c->add_option("--size", o.size, "image size WxH (default " + size + ")");
    c->add_option("--seed", o.seed, "master seed")->capture_default_str();
    c->add_option("--sigma", o.sigma, "spatial input sigma in pixels")->capture_default_str();
    c->add_option("--t", o.t, "time parameter")->capture_default_str();
    c->add_option("--workers", o.workers, "worker threads (0 = all cores)")->capture_default_str();
  };
  auto add_rules = [&](CLI::App* c) {
    c->add_option("--assignment", o.assignment, "rule assignment JSON file");
    c->add_option("--rule", o.rule, "uniform rule when no assignment is given")
        ->capture_default_str();
  };

  CLI::App* compile_cmd = app.add_subcommand("compile", "compile a shader variant and report");
  add_shader(compile_cmd, true);
  add_common(compile_cmd, "256x256");
  add_rules(compile_cmd);
  bool measured = false;
  compile_cmd->add_option("--spp", o.spp, "ground-truth samples per pixel")->capture_default_str();
  compile_cmd->add_option("--out", o.out, "output directory")->required();
  compile_cmd->add_flag("--measured-runtime", measured, "wall-clock instead of cost model");

  CLI::App* render_cmd = app.add_subcommand("render", "render a shader to PNG");
  add_shader(render_cmd, true);
  add_common(render_cmd, "256x256");
  add_rules(render_cmd);
  int frames = 1;
  double dt = 1.0 / 24.0;
  int render_spp = 0;
  render_cmd->add_option("--spp", render_spp, "supersample the direct program (0 = smoothed)")
      ->capture_default_str();
  render_cmd->add_option("--out", o.out, "output PNG")->required();
  render_cmd->add_option("--frames", frames, "numbered frames, t advancing by --dt");
  render_cmd->add_option("--dt", dt, "time step between frames");

  CLI::App* tune_cmd = app.add_subcommand("tune", "genetic search for the time/error frontier");
  add_shader(tune_cmd, true);
  add_common(tune_cmd, "64x64");
  TuneArgs ta;
  tune_cmd->add_option("--spp", o.spp, "ground-truth samples per pixel")->capture_default_str();
  tune_cmd->add_option("--out", o.out, "output directory")->required();
  tune_cmd->add_option("--population", ta.population)->capture_default_str();
  tune_cmd->add_option("--generations", ta.generations)->capture_default_str();
  tune_cmd->add_option("--restarts", ta.restarts)->capture_default_str();
  tune_cmd->add_flag("--refine", ta.refine, "refine sigma-scales of frontier entries");
  tune_cmd->add_flag("--measured-runtime", ta.measured, "wall-clock instead of cost model");

  CLI::App* table_cmd = app.add_subcommand("table-check", "closed forms against quadrature");
  int nx = 20, ns = 10;
  table_cmd->add_option("--nx", nx, "x grid points")->capture_default_str();
  table_cmd->add_option("--ns", ns, "sigma grid points")->capture_default_str();

  CLI::App* denoise_cmd = app.add_subcommand("denoise", "non-local means on a PNG");
  denoise_cmd->set_help_flag("--help", "Print this help message and exit");
  std::string in_png;
  DenoiseConfig dcfg;
  denoise_cmd->add_option("--in", in_png, "input PNG")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("--out", o.out, "output PNG")->required();
  denoise_cmd->add_option("--h", dcfg.h_fine, "finest-level strength (8-bit units)")
      ->capture_default_str();
  denoise_cmd->add_option("--h-coarse", dcfg.h_coarse, "coarser-level strength")
      ->capture_default_str();
  denoise_cmd->add_option("--levels", dcfg.levels)->capture_default_str();
  denoise_cmd->add_option("--workers", dcfg.workers)->capture_default_str();

  CLI::App* gallery_cmd = app.add_subcommand("gallery", "render every built-in with heatmaps");
  add_common(gallery_cmd, "256x256");
  gallery_cmd->add_option("--spp", o.spp, "ground-truth samples per pixel")->capture_default_str();
  gallery_cmd->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  if (o.size.empty()) o.size = *tune_cmd ? "64x64" : "256x256";
  try {
    if (*compile_cmd) return cmd_compile(o, measured, out);
    if (*render_cmd) {
      o.spp = render_spp;
      return cmd_render(o, frames, dt, out);
    }
    if (*tune_cmd) return cmd_tune(o, ta, out);
    if (*table_cmd) return cmd_table_check(nx, ns, out);
    if (*denoise_cmd) return cmd_denoise(in_png, o.out, dcfg, out);
    if (*gallery_cmd) return cmd_gallery(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace smoothc
