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

#include <stdexcept>

#include "smoothc/render.hpp"

namespace smoothc {

namespace {

// Coordinates are in pixels. Feature sizes are a few pixels at 64x64 so
// the unfiltered renders alias visibly.

constexpr const char* kCheckerboard = R"(let u = (x * 0.8 + y * 0.6) * 0.2
let v = (y * 0.8 - x * 0.6) * 0.2
let cu = heaviside(fract(u) - 0.5)
let cv = heaviside(fract(v) - 0.5)
let c = cu + cv - 2.0 * cu * cv
out r = c
out g = c
out b = c
)";

constexpr const char* kCircles = R"(let u = fract(x / 7.0) - 0.5
let v = fract(y / 7.0) - 0.5
let d = pow(u, 2) + pow(v, 2)
let inside = lt(d, 0.09)
out r = 0.15 + 0.8 * inside
out g = 0.2 + 0.5 * inside
out b = 0.6 - 0.4 * inside
)";

constexpr const char* kBricks = R"(let row = floor(y / 5.0)
let bx = fract(x / 11.0 + row * 0.5)
let by = fract(y / 5.0)
let mortar = max(lt(bx, 0.1), lt(by, 0.2))
out r = 0.7 - 0.2 * mortar
out g = 0.25 + 0.45 * mortar
out b = 0.15 + 0.5 * mortar
)";

constexpr const char* kQuadraticSine = R"(let q = (pow(x, 2) + pow(y, 2)) * 0.02 + t
out r = 0.5 + 0.5 * sin(q)
out g = 0.5 + 0.5 * sin(q * 1.2 + 1.0)
out b = 0.5 + 0.5 * cos(q * 0.8)
)";

constexpr const char* kZigzag = R"(let tri = abs(fract(x / 12.0) - 0.5) * 12.0
let band = (y + tri) % 9.0
let s1 = lt(band, 3.0)
let s3 = ge(band, 6.0)
let s2 = 1.0 - s1 - s3
out r = s1 * 0.9 + s2 * 0.2 + s3 * 0.95
out g = s1 * 0.3 + s2 * 0.7 + s3 * 0.8
out b = s1 * 0.2 + s2 * 0.9 + s3 * 0.1
)";

constexpr const char* kCheckerboardBumps = R"(let px = x + 1.5 * sin(y * 0.35)
let py = y + 1.5 * sin(x * 0.3)
let u = (px * 0.8 + py * 0.6) * 0.2
let v = (py * 0.8 - px * 0.6) * 0.2
let cu = heaviside(fract(u) - 0.5)
let cv = heaviside(fract(v) - 0.5)
let c = cu + cv - 2.0 * cu * cv
out r = c
out g = 0.8 * c + 0.1
out b = 0.6 * c + 0.2
)";

Shader make(const char* name, const char* source, bool animated, bool tiling) {
  Shader s;
  s.name = name;
  s.source = source;
  s.graph = parse_shared(source, name);
  s.animated = animated;
  s.tiling = tiling;
  return s;
}

}  // namespace

const std::vector<Shader>& builtin_shaders() {
  static const std::vector<Shader> shaders = {
      make("checkerboard", kCheckerboard, false, true),
      make("circles", kCircles, false, true),
      make("bricks", kBricks, false, true),
      make("quadratic_sine", kQuadraticSine, true, false),
      make("zigzag", kZigzag, false, true),
      make("checkerboard_bumps", kCheckerboardBumps, false, true),
  };
  return shaders;
}

const Shader& shader_by_name(std::string_view name) {
  for (const Shader& s : builtin_shaders()) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown shader '" + std::string(name) + "'");
}

}  // namespace smoothc
