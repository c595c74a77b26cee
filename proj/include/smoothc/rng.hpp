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

// Counter-based random numbers: every draw is a pure function of its key,
// so renders are reproducible regardless of evaluation order.

#ifndef SMOOTHC_RNG_HPP_
#define SMOOTHC_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace smoothc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a,
                                        std::uint64_t b = 0, std::uint64_t c = 0,
                                        std::uint64_t d = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return h;
}

// Uniform on the open interval (0, 1).
inline double to_unit(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Random streams. Spatial inputs are keyed by name so that every graph
// containing x and y draws the same jitter for a given pixel and sample.
enum class Stream : std::uint64_t { kInput = 1, kOperand = 2, kJitter = 3, kTraining = 4 };

inline std::uint64_t stream_id(Stream s, std::uint64_t index) {
  return (static_cast<std::uint64_t>(s) << 48) ^ index;
}

// Standard normal draw for (seed, stream, pixel, sample), Box-Muller.
inline double normal_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel,
                        std::uint64_t sample) {
  const std::uint64_t h = hash_key(seed, stream, pixel, sample);
  const double u1 = to_unit(h);
  const double u2 = to_unit(splitmix64(h ^ 0x5851f42d4c957f2dull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t pixel,
                         std::uint64_t sample) {
  return to_unit(hash_key(seed, stream, pixel, sample));
}

}  // namespace smoothc

#endif  // SMOOTHC_RNG_HPP_
