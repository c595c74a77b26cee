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
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <queue>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace smoothc {

int arity(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kInput:
      return 0;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kMod:
    case Op::kCmpGt:
    case Op::kCmpGe:
    case Op::kCmpLt:
    case Op::kCmpLe:
      return 2;
    case Op::kSelect:
      return 3;
    default:
      return 1;
  }
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kInput: return "input";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kDiv: return "div";
    case Op::kMod: return "mod";
    case Op::kNeg: return "neg";
    case Op::kPowInt: return "pow";
    case Op::kReciprocal: return "recip";
    case Op::kSqrt: return "sqrt";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kTan: return "tan";
    case Op::kSinh: return "sinh";
    case Op::kCosh: return "cosh";
    case Op::kTanh: return "tanh";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kFract: return "fract";
    case Op::kFloor: return "floor";
    case Op::kCeil: return "ceil";
    case Op::kHeaviside: return "heaviside";
    case Op::kCmpGt: return "gt";
    case Op::kCmpGe: return "ge";
    case Op::kCmpLt: return "lt";
    case Op::kCmpLe: return "le";
    case Op::kSelect: return "select";
  }
  return "?";
}

bool is_comparison(Op op) {
  return op == Op::kCmpGt || op == Op::kCmpGe || op == Op::kCmpLt ||
         op == Op::kCmpLe;
}

bool is_unary_function(Op op) {
  return arity(op) == 1;
}

ParseError::ParseError(const std::string& msg, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + msg),
      line_(line),
      column_(column) {}

ProgramGraph::ProgramGraph(std::string name, std::vector<Node> nodes,
                           std::vector<InputVar> inputs,
                           std::vector<OutputVar> outputs)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)) {
  users_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id != static_cast<NodeId>(i)) throw GraphError("node ids must be dense");
    if (n.op == Op::kInput) {
      if (n.input < 0 || n.input >= static_cast<int>(inputs_.size()) ||
          inputs_[n.input].node != n.id) {
        throw GraphError("input node " + std::to_string(i) + " is not declared");
      }
    }
    for (NodeId a : n.operands()) {
      if (a < 0 || a >= n.id) {
        throw GraphError("node " + std::to_string(i) +
                         " has an operand that does not precede it");
      }
      users_[a].push_back(n.id);
    }
    if (n.op != Op::kInput && n.op != Op::kConst) expression_nodes_.push_back(n.id);
  }
  for (auto& u : users_) u.erase(std::unique(u.begin(), u.end()), u.end());
  for (const OutputVar& o : outputs_) {
    if (o.node < 0 || o.node >= static_cast<NodeId>(nodes_.size())) {
      throw GraphError("output '" + o.name + "' refers to a missing node");
    }
  }
}

const Node& ProgramGraph::node(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw GraphError("unknown node id " + std::to_string(id));
  }
  return nodes_[id];
}

int ProgramGraph::input_index(std::string_view name) const {
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (inputs_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { kIdent, kNumber, kSymbol, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      t.kind = Tok::kIdent;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) ||
                                src[j] == '.')) {
        ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      std::string text(src.substr(i, j - i));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("malformed number '" + text + "'", line, col);
      }
      t.kind = Tok::kNumber;
      t.text = std::move(text);
      t.number = v;
      advance(j - i);
    } else if (std::string_view("+-*/%(),=").find(c) != std::string_view::npos) {
      t.kind = Tok::kSymbol;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Hash-consing builder

class Builder {
 public:
  NodeId make(Op op, std::array<NodeId, 3> args = {-1, -1, -1}, double value = 0.0,
              int power = 0) {
    if (op == Op::kConst && value == 0.0) value = 0.0;  // fold -0.0
    Key key{op, args, std::bit_cast<std::uint64_t>(value), power, -1};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Node n;
    n.id = static_cast<NodeId>(nodes_.size());
    n.op = op;
    n.args = args;
    n.value = value;
    n.power = power;
    nodes_.push_back(n);
    memo_.emplace(key, n.id);
    return n.id;
  }

  NodeId constant(double v) { return make(Op::kConst, {-1, -1, -1}, v); }
  NodeId unary(Op op, NodeId a) { return make(op, {a, -1, -1}); }
  NodeId binary(Op op, NodeId a, NodeId b) { return make(op, {a, b, -1}); }
  NodeId select(NodeId c, NodeId a, NodeId b) { return make(Op::kSelect, {c, a, b}); }

  NodeId input(const std::string& name, InputRole role) {
    for (const InputVar& v : inputs_) {
      if (v.name == name) return v.node;
    }
    Node n;
    n.id = static_cast<NodeId>(nodes_.size());
    n.op = Op::kInput;
    n.input = static_cast<int>(inputs_.size());
    nodes_.push_back(n);
    inputs_.push_back({name, role, n.id});
    return n.id;
  }

  NodeId power_of(NodeId x, long n) {
    if (n == 0) return constant(1.0);
    if (n == 1) return x;
    if (n == -1) return unary(Op::kReciprocal, x);
    if (n >= 2 && n <= kMaxPowInt) return make(Op::kPowInt, {x, -1, -1}, 0.0, static_cast<int>(n));
    if (n == kMinPowInt) return make(Op::kPowInt, {x, -1, -1}, 0.0, static_cast<int>(n));
    if (n > kMaxPowInt) {
      return binary(Op::kMul, power_of(x, kMaxPowInt), power_of(x, n - kMaxPowInt));
    }
    return unary(Op::kReciprocal, power_of(x, -n));
  }

  const Node& at(NodeId id) const { return nodes_[id]; }

  ProgramGraph finish(std::string name, std::vector<OutputVar> outputs) && {
    // Drop nodes unreachable from outputs and renumber, keeping order.
    std::vector<char> live(nodes_.size(), 0);
    for (const OutputVar& o : outputs) live[o.node] = 1;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (!live[i]) continue;
      for (NodeId a : nodes_[i].operands()) live[a] = 1;
    }
    std::vector<NodeId> remap(nodes_.size(), -1);
    std::vector<Node> nodes;
    std::vector<InputVar> inputs;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!live[i]) continue;
      Node n = nodes_[i];
      n.id = static_cast<NodeId>(nodes.size());
      for (int k = 0; k < n.arity(); ++k) n.args[k] = remap[n.args[k]];
      if (n.op == Op::kInput) {
        InputVar v = inputs_[n.input];
        v.node = n.id;
        n.input = static_cast<int>(inputs.size());
        inputs.push_back(v);
      }
      remap[i] = n.id;
      nodes.push_back(n);
    }
    for (OutputVar& o : outputs) o.node = remap[o.node];
    return ProgramGraph(std::move(name), std::move(nodes), std::move(inputs),
                        std::move(outputs));
  }

 private:
  using Key = std::tuple<Op, std::array<NodeId, 3>, std::uint64_t, int, int>;
  std::vector<Node> nodes_;
  std::vector<InputVar> inputs_;
  std::map<Key, NodeId> memo_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  ProgramGraph run(std::string name) && {
    std::vector<OutputVar> outputs;
    if (peek().kind == Tok::kEnd) fail("empty program", peek());
    while (peek().kind != Tok::kEnd) {
      const Token& kw = next();
      if (kw.kind != Tok::kIdent || (kw.text != "let" && kw.text != "out")) {
        fail("expected 'let' or 'out'", kw);
      }
      std::string id;
      if (kw.text == "let" || peek().kind == Tok::kIdent) {
        const Token& t = next();
        if (t.kind != Tok::kIdent) fail("expected identifier", t);
        if (kw.text == "let" && is_reserved(t.text)) {
          fail("'" + t.text + "' is reserved", t);
        }
        id = t.text;
      } else {
        id = "out";
      }
      expect("=");
      NodeId value = expr();
      if (kw.text == "let") {
        if (bindings_.count(id)) fail("redefinition of '" + id + "'", kw);
        bindings_[id] = value;
      } else {
        for (const OutputVar& o : outputs) {
          if (o.name == id) fail("duplicate output '" + id + "'", kw);
        }
        outputs.push_back({id, value});
      }
    }
    if (outputs.empty()) fail("program has no outputs", peek());
    return std::move(b_).finish(std::move(name), std::move(outputs));
  }

 private:
  static bool is_reserved(const std::string& s) {
    return s == "let" || s == "out" || s == "x" || s == "y" || s == "t";
  }

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(std::string_view sym) {
    if (peek().kind == Tok::kSymbol && peek().text == sym) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(std::string_view sym) {
    if (!accept(sym)) fail("expected '" + std::string(sym) + "'", peek());
  }
  [[noreturn]] static void fail(const std::string& msg, const Token& t) {
    throw ParseError(msg, t.line, t.column);
  }

  NodeId expr() {
    NodeId lhs = term();
    for (;;) {
      if (accept("+")) {
        lhs = b_.binary(Op::kAdd, lhs, term());
      } else if (accept("-")) {
        lhs = b_.binary(Op::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodeId term() {
    NodeId lhs = unary();
    for (;;) {
      if (accept("*")) {
        lhs = b_.binary(Op::kMul, lhs, unary());
      } else if (accept("/")) {
        lhs = b_.binary(Op::kDiv, lhs, unary());
      } else if (accept("%")) {
        lhs = b_.binary(Op::kMod, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodeId unary() {
    if (accept("-")) {
      if (peek().kind == Tok::kNumber) return b_.constant(-next().number);
      return b_.unary(Op::kNeg, unary());
    }
    return primary();
  }

  NodeId primary() {
    const Token& t = next();
    if (t.kind == Tok::kNumber) return b_.constant(t.number);
    if (t.kind == Tok::kSymbol && t.text == "(") {
      NodeId e = expr();
      expect(")");
      return e;
    }
    if (t.kind != Tok::kIdent) fail("expected expression", t);
    if (accept("(")) {
      std::vector<NodeId> args;
      if (!accept(")")) {
        do {
          args.push_back(expr());
        } while (accept(","));
        expect(")");
      }
      return call(t, args);
    }
    if (t.text == "x" || t.text == "y") return b_.input(t.text, InputRole::kSpatial);
    if (t.text == "t") return b_.input(t.text, InputRole::kParameter);
    if (auto it = bindings_.find(t.text); it != bindings_.end()) return it->second;
    fail("unknown identifier '" + t.text + "'", t);
  }

  NodeId call(const Token& fn, const std::vector<NodeId>& a) {
    static const std::unordered_map<std::string, Op> kUnary = {
        {"neg", Op::kNeg},       {"recip", Op::kReciprocal}, {"sqrt", Op::kSqrt},
        {"sin", Op::kSin},       {"cos", Op::kCos},          {"tan", Op::kTan},
        {"sinh", Op::kSinh},     {"cosh", Op::kCosh},        {"tanh", Op::kTanh},
        {"exp", Op::kExp},       {"log", Op::kLog},          {"fract", Op::kFract},
        {"floor", Op::kFloor},   {"ceil", Op::kCeil},        {"heaviside", Op::kHeaviside},
    };
    static const std::unordered_map<std::string, Op> kBinary = {
        {"mod", Op::kMod}, {"gt", Op::kCmpGt}, {"ge", Op::kCmpGe},
        {"lt", Op::kCmpLt}, {"le", Op::kCmpLe},
    };
    auto need = [&](std::size_t n) {
      if (a.size() != n) {
        fail("arity mismatch: '" + fn.text + "' takes " + std::to_string(n) +
                 " argument(s), got " + std::to_string(a.size()),
             fn);
      }
    };
    const std::string& f = fn.text;
    if (auto it = kUnary.find(f); it != kUnary.end()) {
      need(1);
      return b_.unary(it->second, a[0]);
    }
    if (auto it = kBinary.find(f); it != kBinary.end()) {
      need(2);
      return b_.binary(it->second, a[0], a[1]);
    }
    if (f == "select") {
      need(3);
      return b_.select(a[0], a[1], a[2]);
    }
    if (f == "min") {
      need(2);
      return min_of(a[0], a[1]);
    }
    if (f == "max") {
      need(2);
      return max_of(a[0], a[1]);
    }
    if (f == "abs") {
      need(1);
      return b_.select(b_.binary(Op::kCmpGt, a[0], b_.constant(0.0)), a[0],
                       b_.unary(Op::kNeg, a[0]));
    }
    if (f == "clamp") {
      need(3);
      return min_of(max_of(a[0], a[1]), a[2]);
    }
    if (f == "mix") {
      need(3);
      NodeId d = b_.binary(Op::kSub, a[1], a[0]);
      return b_.binary(Op::kAdd, a[0], b_.binary(Op::kMul, d, a[2]));
    }
    if (f == "step") {
      need(2);
      return b_.binary(Op::kCmpGe, a[1], a[0]);
    }
    if (f == "pow") {
      need(2);
      const Node& p = b_.at(a[1]);
      if (p.op == Op::kConst && std::isfinite(p.value) &&
          p.value == std::trunc(p.value) && std::fabs(p.value) <= 64) {
        return b_.power_of(a[0], static_cast<long>(p.value));
      }
      return b_.unary(Op::kExp, b_.binary(Op::kMul, a[1], b_.unary(Op::kLog, a[0])));
    }
    fail("unknown function '" + f + "'", fn);
  }

  NodeId min_of(NodeId a, NodeId b) {
    return b_.select(b_.binary(Op::kCmpLt, a, b), a, b);
  }
  NodeId max_of(NodeId a, NodeId b) {
    return b_.select(b_.binary(Op::kCmpGt, a, b), a, b);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Builder b_;
  std::map<std::string, NodeId> bindings_;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

ProgramGraph parse_program(std::string_view source, std::string name) {
  return Parser(source).run(std::move(name));
}

GraphPtr parse_shared(std::string_view source, std::string name) {
  return std::make_shared<const ProgramGraph>(parse_program(source, std::move(name)));
}

std::string print_program(const ProgramGraph& g) {
  std::ostringstream os;
  auto ref = [&](NodeId id) { return "_v" + std::to_string(id); };
  for (const Node& n : g.nodes()) {
    os << "let " << ref(n.id) << " = ";
    switch (n.op) {
      case Op::kConst:
        os << format_double(n.value);
        break;
      case Op::kInput:
        os << g.inputs()[n.input].name;
        break;
      case Op::kAdd:
        os << ref(n.args[0]) << " + " << ref(n.args[1]);
        break;
      case Op::kSub:
        os << ref(n.args[0]) << " - " << ref(n.args[1]);
        break;
      case Op::kMul:
        os << ref(n.args[0]) << " * " << ref(n.args[1]);
        break;
      case Op::kDiv:
        os << ref(n.args[0]) << " / " << ref(n.args[1]);
        break;
      case Op::kMod:
        os << ref(n.args[0]) << " % " << ref(n.args[1]);
        break;
      case Op::kNeg:
        os << "-" << ref(n.args[0]);
        break;
      case Op::kPowInt:
        os << "pow(" << ref(n.args[0]) << ", " << n.power << ")";
        break;
      default: {
        os << op_name(n.op) << "(";
        for (int k = 0; k < n.arity(); ++k) {
          if (k) os << ", ";
          os << ref(n.args[k]);
        }
        os << ")";
      }
    }
    os << "\n";
  }
  for (const OutputVar& o : g.outputs()) {
    os << "out " << o.name << " = " << ref(o.node) << "\n";
  }
  return os.str();
}

std::vector<NodeId> topo_order(const ProgramGraph& g) {
  // Kahn's algorithm, smallest ready id first.
  const std::size_t n = g.size();
  std::vector<int> pending(n, 0);
  for (const Node& node : g.nodes()) {
    std::set<NodeId> distinct(node.operands().begin(), node.operands().end());
    pending[node.id] = static_cast<int>(distinct.size());
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(static_cast<NodeId>(i));
  }
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    order.push_back(id);
    for (NodeId u : g.users(id)) {
      if (--pending[u] == 0) ready.push(u);
    }
  }
  return order;
}

std::set<NodeId> subtree_nodes(const ProgramGraph& g, NodeAddress root) {
  g.node(root.id);
  std::set<NodeId> seen;
  std::vector<NodeId> stack{root.id};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    for (NodeId a : g.node(id).operands()) stack.push_back(a);
  }
  return seen;
}

std::vector<NodeId> dfs_order(const ProgramGraph& g) {
  std::vector<char> seen(g.size(), 0);
  std::vector<NodeId> order;
  std::vector<NodeId> stack;
  for (const OutputVar& o : g.outputs()) {
    stack.push_back(o.node);
    while (!stack.empty()) {
      NodeId id = stack.back();
      stack.pop_back();
      if (seen[id]) continue;
      seen[id] = 1;
      const Node& n = g.node(id);
      if (n.op != Op::kInput && n.op != Op::kConst) order.push_back(id);
      auto ops = n.operands();
      for (auto it = ops.rbegin(); it != ops.rend(); ++it) stack.push_back(*it);
    }
  }
  return order;
}

double apply_op(OpCode code, std::span<const double> a) {
  switch (code.op) {
    case Op::kConst:
    case Op::kInput:
      return a.empty() ? 0.0 : a[0];
    case Op::kAdd: return a[0] + a[1];
    case Op::kSub: return a[0] - a[1];
    case Op::kMul: return a[0] * a[1];
    case Op::kDiv: return a[0] / a[1];
    case Op::kMod: return a[0] - a[1] * std::floor(a[0] / a[1]);
    case Op::kNeg: return -a[0];
    case Op::kPowInt: {
      double r = 1.0;
      for (int k = 0; k < std::abs(code.power); ++k) r *= a[0];
      return code.power < 0 ? 1.0 / r : r;
    }
    case Op::kReciprocal: return 1.0 / a[0];
    case Op::kSqrt: return std::sqrt(a[0]);
    case Op::kSin: return std::sin(a[0]);
    case Op::kCos: return std::cos(a[0]);
    case Op::kTan: return std::tan(a[0]);
    case Op::kSinh: return std::sinh(a[0]);
    case Op::kCosh: return std::cosh(a[0]);
    case Op::kTanh: return std::tanh(a[0]);
    case Op::kExp: return std::exp(a[0]);
    case Op::kLog: return std::log(a[0]);
    case Op::kFract: return a[0] - std::floor(a[0]);
    case Op::kFloor: return std::floor(a[0]);
    case Op::kCeil: return std::ceil(a[0]);
    case Op::kHeaviside: return a[0] > 0.0 ? 1.0 : 0.0;
    case Op::kCmpGt: return a[0] > a[1] ? 1.0 : 0.0;
    case Op::kCmpGe: return a[0] >= a[1] ? 1.0 : 0.0;
    case Op::kCmpLt: return a[0] < a[1] ? 1.0 : 0.0;
    case Op::kCmpLe: return a[0] <= a[1] ? 1.0 : 0.0;
    case Op::kSelect:
      // Linear interpolation, exact at the boolean ends.
      if (a[0] == 1.0) return a[1];
      if (a[0] == 0.0) return a[2];
      return a[0] * a[1] + (1.0 - a[0]) * a[2];
  }
  return 0.0;
}

void evaluate_direct(const ProgramGraph& g, std::span<const double> inputs,
                     std::span<double> values) {
  std::array<double, 3> args{};
  for (const Node& n : g.nodes()) {
    if (n.op == Op::kConst) {
      values[n.id] = n.value;
    } else if (n.op == Op::kInput) {
      values[n.id] = inputs[n.input];
    } else {
      for (int k = 0; k < n.arity(); ++k) args[k] = values[n.args[k]];
      values[n.id] = apply_op(n.code(), {args.data(), static_cast<std::size_t>(n.arity())});
    }
  }
}

std::vector<double> evaluate_outputs(const ProgramGraph& g,
                                     std::span<const double> inputs) {
  std::vector<double> values(g.size());
  evaluate_direct(g, inputs, values);
  std::vector<double> out;
  for (const OutputVar& o : g.outputs()) out.push_back(values[o.node]);
  return out;
}

std::uint64_t structural_hash(const ProgramGraph& g) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : print_program(g)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace smoothc
