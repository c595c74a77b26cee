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

#ifndef SMOOTHC_IR_HPP_
#define SMOOTHC_IR_HPP_

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smoothc {

using NodeId = int;

// Scalar operator inventory. min/max/abs/clamp/mix/step and general pow are
// lowered by the parser, so nothing downstream ever sees them.
enum class Op : std::uint8_t {
  kConst,
  kInput,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kMod,
  kNeg,
  kPowInt,
  kReciprocal,
  kSqrt,
  kSin,
  kCos,
  kTan,
  kSinh,
  kCosh,
  kTanh,
  kExp,
  kLog,
  kFract,
  kFloor,
  kCeil,
  kHeaviside,
  kCmpGt,
  kCmpGe,
  kCmpLt,
  kCmpLe,
  kSelect,
};

inline constexpr int kNumOps = static_cast<int>(Op::kSelect) + 1;

// An operator together with its static parameter (the exponent of kPowInt).
struct OpCode {
  Op op = Op::kConst;
  int power = 0;

  friend bool operator==(const OpCode&, const OpCode&) = default;
};

int arity(Op op);
std::string_view op_name(Op op);
bool is_comparison(Op op);
// Unary scalar functions handled by the closed-form kernel table.
bool is_unary_function(Op op);

// Exponents kept as a single kPowInt node; others are lowered.
inline constexpr int kMinPowInt = -2;
inline constexpr int kMaxPowInt = 8;

struct Node {
  NodeId id = 0;
  Op op = Op::kConst;
  std::array<NodeId, 3> args{-1, -1, -1};
  double value = 0.0;  // kConst only
  int power = 0;       // kPowInt only
  int input = -1;      // kInput: index into ProgramGraph::inputs()

  int arity() const { return smoothc::arity(op); }
  std::span<const NodeId> operands() const {
    return {args.data(), static_cast<std::size_t>(arity())};
  }
  OpCode code() const { return {op, power}; }
};

enum class InputRole : std::uint8_t { kSpatial, kParameter };

struct InputVar {
  std::string name;
  InputRole role = InputRole::kSpatial;
  NodeId node = -1;
};

struct OutputVar {
  std::string name;
  NodeId node = -1;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable DAG of scalar float operations. Nodes are stored in
// topological order: every operand id is smaller than its user's id.
class ProgramGraph {
 public:
  ProgramGraph(std::string name, std::vector<Node> nodes,
               std::vector<InputVar> inputs, std::vector<OutputVar> outputs);

  const std::string& name() const { return name_; }
  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  std::span<const InputVar> inputs() const { return inputs_; }
  std::span<const OutputVar> outputs() const { return outputs_; }
  // Ids of nodes whose approximation rule is tunable (not inputs/consts).
  std::span<const NodeId> expression_nodes() const { return expression_nodes_; }
  // Users of each node, in increasing id order.
  std::span<const NodeId> users(NodeId id) const { return users_.at(id); }
  int input_index(std::string_view name) const;  // -1 if absent

 private:
  std::string name_;
  std::vector<Node> nodes_;
  std::vector<InputVar> inputs_;
  std::vector<OutputVar> outputs_;
  std::vector<NodeId> expression_nodes_;
  std::vector<std::vector<NodeId>> users_;
};

using GraphPtr = std::shared_ptr<const ProgramGraph>;

// Parses the .smdl DSL. Identical subexpressions share a node; nodes not
// reachable from an output are dropped.
ProgramGraph parse_program(std::string_view source, std::string name = "program");
GraphPtr parse_shared(std::string_view source, std::string name = "program");

// Prints a graph as DSL text that parses back to an identical node list.
std::string print_program(const ProgramGraph& g);

std::vector<NodeId> topo_order(const ProgramGraph& g);

struct NodeAddress {
  NodeId id = 0;
  bool subtree = false;
};

// Transitive operands of root, root included.
std::set<NodeId> subtree_nodes(const ProgramGraph& g, NodeAddress root);

// Expression nodes in depth-first pre-order from the outputs, each once.
std::vector<NodeId> dfs_order(const ProgramGraph& g);

// Direct (unsmoothed) semantics of one operator.
double apply_op(OpCode code, std::span<const double> args);

// Evaluates every node at the given input values (indexed like inputs()).
void evaluate_direct(const ProgramGraph& g, std::span<const double> inputs,
                     std::span<double> values);
std::vector<double> evaluate_outputs(const ProgramGraph& g,
                                     std::span<const double> inputs);

// FNV-1a over the printed program text.
std::uint64_t structural_hash(const ProgramGraph& g);

}  // namespace smoothc

#endif  // SMOOTHC_IR_HPP_
