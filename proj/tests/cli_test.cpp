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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "smoothc/image.hpp"

namespace smoothc {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "smoothc");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("smoothc_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("tune"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"compile", "--shader", "checkerboard", "--out", "x", "--bogus"}).code,
            kExitUsage);
  EXPECT_EQ(run({"render", "--shader", "checkerboard", "--size", "12", "--out", "a.png"}).code,
            kExitUsage);
}

TEST(Cli, UnknownShaderExitsOne) {
  const CliRun r = run({"render", "--shader", "no_such_shader", "--out", "a.png"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("no_such_shader"), std::string::npos);
}

TEST(Cli, TableCheckPasses) {
  const CliRun r = run({"table-check"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_NE(r.out.find("worst"), std::string::npos);
}

TEST(Cli, CompileWritesReport) {
  const fs::path dir = scratch("compile");
  const CliRun r = run({"compile", "--shader", "circles", "--size", "16x16", "--spp", "64",
                     "--rule", "adaptive", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"variant.png", "heatmap.png", "ground_truth.png", "ground_truth.json",
                        "report.json", "metrics.csv", "assignment.json"}) {
    EXPECT_TRUE(fs::exists(dir / "circles" / f)) << f;
  }
  std::ifstream rep(dir / "circles" / "report.json");
  const nlohmann::json j = nlohmann::json::parse(rep);
  EXPECT_LT(j.at("l2_srgb").get<double>(), j.at("no_aa_l2_srgb").get<double>());
  fs::remove_all(dir);
}

TEST(Cli, CompileReadsShaderFileAndAssignment) {
  const fs::path dir = scratch("file");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "stripes.smdl") << "let s = heaviside(fract(x * 0.2) - 0.5)\n"
                                           "out r = s\nout g = s\nout b = s\n";
  }
  CliRun r = run({"compile", "--shader", (dir / "stripes.smdl").string(), "--size", "8x8", "--spp",
               "16", "--rule", "dorn", "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = run({"compile", "--shader", (dir / "stripes.smdl").string(), "--size", "8x8", "--spp", "16",
           "--assignment", (dir / "stripes" / "assignment.json").string(), "--out",
           (dir / "again").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream a(dir / "stripes" / "metrics.csv"), b(dir / "again" / "stripes" / "metrics.csv");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  fs::remove_all(dir);
}

TEST(Cli, RenderFramesAndSidecar) {
  const fs::path dir = scratch("render");
  CliRun r = run({"render", "--shader", "quadratic_sine", "--size", "8x8", "--frames", "2", "--out",
               (dir / "f.png").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "f_0000.png"));
  EXPECT_TRUE(fs::exists(dir / "f_0001.png"));
  r = run({"render", "--shader", "bricks", "--size", "8x6", "--spp", "32", "--seed", "5", "--out",
           (dir / "gt.png").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream side(dir / "gt.json");
  const nlohmann::json j = nlohmann::json::parse(side);
  EXPECT_EQ(j.at("spp"), 32);
  EXPECT_EQ(j.at("seed"), 5);
  EXPECT_EQ(j.at("height"), 6);
  EXPECT_EQ(j.at("shader_hash").get<std::string>().size(), 16u);
  fs::remove_all(dir);
}

TEST(Cli, TuneWritesOutputs) {
  const fs::path dir = scratch("tune");
  const CliRun r = run({"tune", "--shader", "circles", "--size", "12x12", "--spp", "32",
                     "--population", "8", "--generations", "3", "--restarts", "1", "--refine",
                     "--out", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"frontier.jsonl", "frontier.csv", "baselines.csv", "pareto.svg",
                        "rule_usage.md"}) {
    EXPECT_TRUE(fs::exists(dir / "circles" / f)) << f;
  }
  std::ifstream csv(dir / "circles" / "frontier.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "variant_id,runtime_ms,ratio,l2_srgb");
  fs::remove_all(dir);
}

TEST(Cli, DenoisePng) {
  const fs::path dir = scratch("denoise");
  fs::create_directories(dir);
  write_png((dir / "in.png").string(), Image(16, 16, 3, 0.25));
  const CliRun r = run({"denoise", "--in", (dir / "in.png").string(), "--out",
                     (dir / "out.png").string(), "--h", "12"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Image out = read_png((dir / "out.png").string());
  EXPECT_EQ(out.width(), 16);
  EXPECT_EQ(run({"denoise", "--in", (dir / "missing.png").string(), "--out", "x.png"}).code,
            kExitUsage);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace smoothc
