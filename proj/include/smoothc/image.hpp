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

#ifndef SMOOTHC_IMAGE_HPP_
#define SMOOTHC_IMAGE_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace smoothc {

// One channel, row-major, indexed (row, col).
using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ImageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Planar float image in linear color.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const { return channels_.empty() ? 0 : static_cast<int>(channels_[0].cols()); }
  int height() const { return channels_.empty() ? 0 : static_cast<int>(channels_[0].rows()); }
  int channel_count() const { return static_cast<int>(channels_.size()); }

  Plane& operator[](int c) { return channels_.at(c); }
  const Plane& operator[](int c) const { return channels_.at(c); }

  friend bool operator==(const Image& a, const Image& b);

 private:
  std::vector<Plane> channels_;
};

// Standard sRGB transfer curves on [0, 1].
double srgb_encode(double linear);
double srgb_decode(double encoded);

// Clamps to [0, 1] and applies srgb_encode per sample.
Image to_srgb(const Image& linear);

// 8-bit sRGB PNG. One channel is written as gray, three as RGB.
void write_png(const std::string& path, const Image& linear);
// Reads gray, gray+alpha, RGB or RGBA (alpha dropped), returning linear values.
Image read_png(const std::string& path);

}  // namespace smoothc

#endif  // SMOOTHC_IMAGE_HPP_
