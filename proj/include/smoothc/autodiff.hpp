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

#ifndef SMOOTHC_AUTODIFF_HPP_
#define SMOOTHC_AUTODIFF_HPP_

#include <span>

#include <Eigen/Core>

#include "smoothc/ir.hpp"

namespace smoothc {

inline constexpr int kMaxGradientInputs = 8;

// Gradient with respect to the graph inputs; stack storage only.
using InputGradient = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxGradientInputs, 1>;

// d op / d operand_k at the given operand values. Piecewise-constant ops
// (floor, ceil, heaviside, comparisons) have zero derivative; fract has 1.
void local_partials(OpCode code, std::span<const double> args, std::span<double> out);

// Reverse accumulation from `target` back to the inputs. `values` holds the
// direct value of every node; `adjoint` is scratch of size g.size().
InputGradient reverse_gradient(const ProgramGraph& g, std::span<const double> values,
                               NodeId target, std::span<double> adjoint);

// Convenience form: evaluates the graph at `inputs` first.
InputGradient gradient(const ProgramGraph& g, NodeId target, std::span<const double> inputs);

}  // namespace smoothc

#endif  // SMOOTHC_AUTODIFF_HPP_
