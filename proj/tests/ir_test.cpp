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

#include "smoothc/ir.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

namespace smoothc {
namespace {

TEST(ParseTest, Square) {
  ProgramGraph g = parse_program("out = x*x");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g.node(0).op, Op::kInput);
  EXPECT_EQ(g.node(1).op, Op::kMul);
  EXPECT_EQ(g.node(1).args[0], 0);
  EXPECT_EQ(g.node(1).args[1], 0);
  ASSERT_EQ(g.outputs().size(), 1u);
  EXPECT_EQ(g.outputs()[0].name, "out");
  EXPECT_EQ(g.outputs()[0].node, 1);
}

TEST(ParseTest, SinOfSquare) {
  ProgramGraph g = parse_program("out = sin(x*x)");
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g.node(2).op, Op::kSin);
  EXPECT_EQ(g.expression_nodes().size(), 2u);
}

TEST(ParseTest, SharedConstant) {
  ProgramGraph g = parse_program("out = fract(x/4.0)");
  EXPECT_EQ(g.size(), 4u);  // x, 4.0, div, fract
  ProgramGraph g2 = parse_program("out r = fract(x/4.0) + fract(y/4.0)");
  int consts = 0;
  for (const Node& n : g2.nodes()) consts += n.op == Op::kConst;
  EXPECT_EQ(consts, 1);
}

TEST(ParseTest, DiamondDedup) {
  ProgramGraph g = parse_program("out = (x+1)*(x+1)");
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g.node(3).args[0], g.node(3).args[1]);
}

TEST(ParseTest, LetAndMultipleOutputs) {
  ProgramGraph g = parse_program(
      "let a = x * 2\n"
      "let b = a + y\n"
      "out r = a\n"
      "out g = b\n"
      "out b = t\n");
  ASSERT_EQ(g.outputs().size(), 3u);
  EXPECT_EQ(g.inputs().size(), 3u);
  EXPECT_EQ(g.inputs()[g.input_index("t")].role, InputRole::kParameter);
  EXPECT_EQ(g.inputs()[g.input_index("x")].role, InputRole::kSpatial);
  std::vector<double> out = evaluate_outputs(g, std::vector<double>{1.5, 2.0, 0.25});
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], 5.0);
  EXPECT_DOUBLE_EQ(out[2], 0.25);
}

TEST(ParseTest, PrecedenceAndUnaryMinus) {
  ProgramGraph g = parse_program("out = -x + 2 * 3 - 8 / 4 % 3");
  // -x + 6 - ((8/4) % 3) = -x + 6 - 2
  std::vector<double> out = evaluate_outputs(g, std::vector<double>{1.0});
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  ProgramGraph neg = parse_program("out = -(x*x)");
  EXPECT_EQ(neg.node(neg.outputs()[0].node).op, Op::kNeg);
  ProgramGraph lit = parse_program("out = x * -2.5e-1");
  EXPECT_EQ(lit.node(1).value, -0.25);
}

TEST(ParseTest, MinMaxLowerToSelect) {
  ProgramGraph g = parse_program("out = max(x, y) - min(x, 0.5)");
  for (const Node& n : g.nodes()) {
    EXPECT_TRUE(n.op == Op::kInput || n.op == Op::kConst || n.op == Op::kSelect ||
                is_comparison(n.op) || n.op == Op::kSub);
  }
  std::vector<double> out = evaluate_outputs(g, std::vector<double>{0.25, 2.0});
  EXPECT_DOUBLE_EQ(out[0], 2.0 - 0.25);
}

TEST(ParseTest, PowLowering) {
  auto top = [](const char* src) {
    ProgramGraph g = parse_program(src);
    return g.node(g.outputs()[0].node);
  };
  EXPECT_EQ(top("out = pow(x, 3)").op, Op::kPowInt);
  EXPECT_EQ(top("out = pow(x, 3)").power, 3);
  EXPECT_EQ(top("out = pow(x, -2)").power, -2);
  EXPECT_EQ(top("out = pow(x, -1)").op, Op::kReciprocal);
  EXPECT_EQ(top("out = pow(x, 1)").op, Op::kInput);
  EXPECT_EQ(top("out = pow(x, 0)").op, Op::kConst);
  EXPECT_EQ(top("out = pow(x, 11)").op, Op::kMul);
  EXPECT_EQ(top("out = pow(x, -3)").op, Op::kReciprocal);
  EXPECT_EQ(top("out = pow(x, 0.5)").op, Op::kExp);

  ProgramGraph g = parse_program("out = pow(x, 11) + pow(x, -3) + pow(x, 2.5)");
  std::vector<double> out = evaluate_outputs(g, std::vector<double>{1.3});
  EXPECT_NEAR(out[0], std::pow(1.3, 11) + std::pow(1.3, -3) + std::pow(1.3, 2.5), 1e-12);
}

TEST(ParseTest, BuiltinLowerings) {
  ProgramGraph g = parse_program(
      "out a = abs(x)\n"
      "out b = clamp(x, 0, 1)\n"
      "out c = mix(2, 4, y)\n"
      "out d = step(0.5, x)\n");
  auto run = [&](double x, double y) { return evaluate_outputs(g, std::vector<double>{x, y}); };
  std::vector<double> o = run(-0.75, 0.25);
  EXPECT_DOUBLE_EQ(o[0], 0.75);
  EXPECT_DOUBLE_EQ(o[1], 0.0);
  EXPECT_DOUBLE_EQ(o[2], 2.5);
  EXPECT_DOUBLE_EQ(o[3], 0.0);
  o = run(1.5, 1.0);
  EXPECT_DOUBLE_EQ(o[1], 1.0);
  EXPECT_DOUBLE_EQ(o[3], 1.0);
  EXPECT_DOUBLE_EQ(run(0.5, 0.0)[3], 1.0);
}

TEST(ParseTest, Errors) {
  try {
    parse_program("out = x +\n  * 2");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 3);
  }
  EXPECT_THROW(parse_program("out = foo"), ParseError);
  EXPECT_THROW(parse_program("out = bar(x)"), ParseError);
  EXPECT_THROW(parse_program("out = sin(x, y)"), ParseError);
  EXPECT_THROW(parse_program("out = select(x, y)"), ParseError);
  EXPECT_THROW(parse_program("let a = x\nlet a = y\nout = a"), ParseError);
  EXPECT_THROW(parse_program("let x = 2\nout = x"), ParseError);
  EXPECT_THROW(parse_program("let a = x"), ParseError);
  EXPECT_THROW(parse_program(""), ParseError);
  EXPECT_THROW(parse_program("out = x $ 2"), ParseError);
  EXPECT_THROW(parse_program("out = (x"), ParseError);
}

TEST(ParseTest, DeadBindingsArePruned) {
  ProgramGraph g = parse_program("let unused = cos(y) * 7\nout = x + 1");
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.inputs().size(), 1u);
  EXPECT_EQ(g.inputs()[0].name, "x");
}

const char* kRoundTripSources[] = {
    "out = x*x",
    "out = sin(x*x)",
    "let s = fract(x/4.0)\nlet t2 = floor(y*0.5)\nout r = select(gt(s, 0.5), s, t2)\n"
    "out g = -s\nout b = pow(x, 5) + pow(y, -2) + recip(x) + 1e-30",
    "out = exp(tanh(x) * log(y + 3)) % 0.7 - heaviside(sqrt(x*x + 1) - 1.2)",
};

TEST(PrintTest, RoundTripIsIdentical) {
  for (const char* src : kRoundTripSources) {
    ProgramGraph g = parse_program(src);
    ProgramGraph h = parse_program(print_program(g));
    ASSERT_EQ(g.size(), h.size()) << src;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Node& a = g.nodes()[i];
      const Node& b = h.nodes()[i];
      EXPECT_EQ(a.op, b.op);
      EXPECT_EQ(a.args, b.args);
      EXPECT_EQ(a.power, b.power);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(a.value), std::bit_cast<std::uint64_t>(b.value));
    }
    ASSERT_EQ(g.outputs().size(), h.outputs().size());
    for (std::size_t i = 0; i < g.outputs().size(); ++i) {
      EXPECT_EQ(g.outputs()[i].name, h.outputs()[i].name);
      EXPECT_EQ(g.outputs()[i].node, h.outputs()[i].node);
    }
    EXPECT_EQ(structural_hash(g), structural_hash(h));
  }
}

TEST(TopoTest, Examples) {
  ProgramGraph single = parse_program("out = x");
  EXPECT_EQ(topo_order(single), std::vector<NodeId>{0});
  ProgramGraph sq = parse_program("out = sin(x*x)");
  EXPECT_EQ(topo_order(sq), (std::vector<NodeId>{0, 1, 2}));
  ProgramGraph diamond = parse_program("out = (x+1)*(x+1)");
  std::vector<NodeId> order = topo_order(diamond);
  EXPECT_EQ(order.size(), diamond.size());
  EXPECT_EQ(std::count(order.begin(), order.end(), 2), 1);
}

TEST(TopoTest, PermutationRespectingEdges) {
  for (const char* src : kRoundTripSources) {
    ProgramGraph g = parse_program(src);
    std::vector<NodeId> order = topo_order(g);
    std::vector<NodeId> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<NodeId> ids(g.size());
    std::iota(ids.begin(), ids.end(), 0);
    EXPECT_EQ(sorted, ids);
    std::vector<int> pos(g.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    for (const Node& n : g.nodes()) {
      for (NodeId a : n.operands()) EXPECT_LT(pos[a], pos[n.id]);
    }
  }
}

TEST(SubtreeTest, Examples) {
  ProgramGraph g = parse_program("out = sin(x*x)");
  EXPECT_EQ(subtree_nodes(g, {0, true}), (std::set<NodeId>{0}));
  EXPECT_EQ(subtree_nodes(g, {2, true}), (std::set<NodeId>{0, 1, 2}));
  ProgramGraph d = parse_program("out = (x+1)*(x+1)");
  EXPECT_EQ(subtree_nodes(d, {3, true}).size(), 4u);
  EXPECT_THROW(subtree_nodes(d, {17, true}), GraphError);
}

TEST(DfsTest, PreOrderFromOutputs) {
  // add(mul(x, y), sin(x)) -> add, mul, sin
  ProgramGraph g = parse_program("out = x*y + sin(x)");
  std::vector<NodeId> order = dfs_order(g);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_EQ(g.node(order[0]).op, Op::kAdd);
  EXPECT_EQ(g.node(order[1]).op, Op::kMul);
  EXPECT_EQ(g.node(order[2]).op, Op::kSin);
}

TEST(GraphTest, ConstructionChecks) {
  Node in;
  in.id = 0;
  in.op = Op::kInput;
  in.input = 0;
  Node bad;
  bad.id = 1;
  bad.op = Op::kSin;
  bad.args = {1, -1, -1};
  EXPECT_THROW(ProgramGraph("g", {in, bad}, {{"x", InputRole::kSpatial, 0}}, {{"o", 1}}),
               GraphError);
  bad.args = {0, -1, -1};
  EXPECT_THROW(ProgramGraph("g", {in, bad}, {{"x", InputRole::kSpatial, 0}}, {{"o", 5}}),
               GraphError);
  ProgramGraph ok("g", {in, bad}, {{"x", InputRole::kSpatial, 0}}, {{"o", 1}});
  EXPECT_EQ(ok.users(0).size(), 1u);
}

TEST(ApplyOpTest, Semantics) {
  auto ap = [](Op op, std::vector<double> a, int power = 0) {
    return apply_op({op, power}, a);
  };
  EXPECT_DOUBLE_EQ(ap(Op::kMod, {-0.25, 1.0}), 0.75);
  EXPECT_DOUBLE_EQ(ap(Op::kFract, {-1.25}), 0.75);
  EXPECT_DOUBLE_EQ(ap(Op::kHeaviside, {0.0}), 0.0);
  EXPECT_DOUBLE_EQ(ap(Op::kHeaviside, {1e-300}), 1.0);
  EXPECT_DOUBLE_EQ(ap(Op::kCmpGe, {1.0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(ap(Op::kCmpGt, {1.0, 1.0}), 0.0);
  EXPECT_DOUBLE_EQ(ap(Op::kSelect, {0.25, 4.0, 8.0}), 7.0);
  EXPECT_DOUBLE_EQ(ap(Op::kSelect, {1.0, 4.0, INFINITY}), 4.0);
  EXPECT_DOUBLE_EQ(ap(Op::kPowInt, {2.0}, -2), 0.25);
  EXPECT_DOUBLE_EQ(ap(Op::kPowInt, {-2.0}, 5), -32.0);
}

}  // namespace
}  // namespace smoothc
