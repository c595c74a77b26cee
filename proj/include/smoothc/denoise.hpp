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

// Non-local means on the bands of a Laplacian pyramid.

#ifndef SMOOTHC_DENOISE_HPP_
#define SMOOTHC_DENOISE_HPP_

#include <vector>

#include "smoothc/image.hpp"

namespace smoothc {

struct DenoiseConfig {
  int levels = 3;
  int patch_size = 5;
  int search_radius = 10;
  // Filtering strength in 8-bit sRGB units: finest band, and every coarser
  // band.
  double h_fine = 10.0;
  double h_coarse = 10.0;
  // Finest-band noise std in 8-bit units; negative estimates it with
  // estimate_noise_sigma.
  double sigma_n = -1.0;
  int workers = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

// Bands finest first; the last entry is the coarse residual.
std::vector<Image> laplacian_pyramid(const Image& img, int levels);
Image reconstruct_pyramid(const std::vector<Image>& bands);

// Robust noise std of one band: median(|v|) / 0.6745 over all samples.
double mad_sigma(const Image& band);

// mad_sigma of the finest Haar diagonal band (a - b - c + d) / 2 over 2x2
// blocks, which carries far less edge energy than the Laplacian band.
double estimate_noise_sigma(const Image& img);

// Non-local means of one image. h and sigma_n are in the image's units.
Image nlmeans(const Image& img, int patch_size, int search_radius, double h, double sigma_n,
              int workers = 1);

// Denoises a linear image; filtering happens on sRGB-encoded values and the
// result is returned linear.
Image nlmeans_denoise(const Image& img, const DenoiseConfig& cfg = {});

}  // namespace smoothc

#endif  // SMOOTHC_DENOISE_HPP_
