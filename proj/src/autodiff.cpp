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

#include "smoothc/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace smoothc {

void local_partials(OpCode code, std::span<const double> a, std::span<double> d) {
  switch (code.op) {
    case Op::kConst:
    case Op::kInput:
      return;
    case Op::kAdd:
      d[0] = 1.0;
      d[1] = 1.0;
      return;
    case Op::kSub:
      d[0] = 1.0;
      d[1] = -1.0;
      return;
    case Op::kMul:
      d[0] = a[1];
      d[1] = a[0];
      return;
    case Op::kDiv:
      d[0] = 1.0 / a[1];
      d[1] = -a[0] / (a[1] * a[1]);
      return;
    case Op::kMod:
      d[0] = 1.0;
      d[1] = -std::floor(a[0] / a[1]);
      return;
    case Op::kNeg:
      d[0] = -1.0;
      return;
    case Op::kPowInt:
      d[0] = code.power * apply_op({Op::kPowInt, code.power - 1}, a);
      return;
    case Op::kReciprocal:
      d[0] = -1.0 / (a[0] * a[0]);
      return;
    case Op::kSqrt:
      d[0] = 0.5 / std::sqrt(a[0]);
      return;
    case Op::kSin:
      d[0] = std::cos(a[0]);
      return;
    case Op::kCos:
      d[0] = -std::sin(a[0]);
      return;
    case Op::kTan: {
      const double t = std::tan(a[0]);
      d[0] = 1.0 + t * t;
      return;
    }
    case Op::kSinh:
      d[0] = std::cosh(a[0]);
      return;
    case Op::kCosh:
      d[0] = std::sinh(a[0]);
      return;
    case Op::kTanh: {
      const double t = std::tanh(a[0]);
      d[0] = 1.0 - t * t;
      return;
    }
    case Op::kExp:
      d[0] = std::exp(a[0]);
      return;
    case Op::kLog:
      d[0] = 1.0 / a[0];
      return;
    case Op::kFract:
      d[0] = 1.0;
      return;
    case Op::kFloor:
    case Op::kCeil:
    case Op::kHeaviside:
      d[0] = 0.0;
      return;
    case Op::kCmpGt:
    case Op::kCmpGe:
    case Op::kCmpLt:
    case Op::kCmpLe:
      d[0] = 0.0;
      d[1] = 0.0;
      return;
    case Op::kSelect:
      d[0] = a[1] - a[2];
      d[1] = a[0];
      d[2] = 1.0 - a[0];
      return;
  }
}

InputGradient reverse_gradient(const ProgramGraph& g, std::span<const double> values,
                               NodeId target, std::span<double> adjoint) {
  const int n_inputs = static_cast<int>(g.inputs().size());
  if (n_inputs > kMaxGradientInputs) {
    throw std::invalid_argument("too many inputs for gradient evaluation");
  }
  InputGradient grad = InputGradient::Zero(n_inputs);
  std::fill(adjoint.begin(), adjoint.begin() + target + 1, 0.0);
  adjoint[target] = 1.0;
  std::array<double, 3> args{};
  std::array<double, 3> partials{};
  for (NodeId id = target; id >= 0; --id) {
    const double adj = adjoint[id];
    if (adj == 0.0) continue;
    const Node& n = g.nodes()[id];
    if (n.op == Op::kInput) {
      grad[n.input] += adj;
      continue;
    }
    const int k = n.arity();
    if (k == 0) continue;
    for (int i = 0; i < k; ++i) args[i] = values[n.args[i]];
    local_partials(n.code(), {args.data(), static_cast<std::size_t>(k)},
                   {partials.data(), static_cast<std::size_t>(k)});
    for (int i = 0; i < k; ++i) adjoint[n.args[i]] += adj * partials[i];
  }
  return grad;
}

InputGradient gradient(const ProgramGraph& g, NodeId target, std::span<const double> inputs) {
  std::vector<double> values(g.size());
  std::vector<double> adjoint(g.size());
  evaluate_direct(g, inputs, values);
  return reverse_gradient(g, values, target, adjoint);
}

}  // namespace smoothc
