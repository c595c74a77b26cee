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

#include "smoothc/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "smoothc/parallel.hpp"

namespace smoothc {

namespace {

constexpr double kBinomial[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

// Per-level noise std factor of white noise through one blur-and-decimate
// step: sqrt of the squared 2-D binomial kernel sum, (70/256).
constexpr double kLevelNoiseFactor = 70.0 / 256.0;

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Plane blur(const Plane& p) {
  const int h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  Plane tmp(h, w), out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kBinomial[k + 2] * p(r, reflect(c + k, w));
      tmp(r, c) = s;
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double s = 0.0;
      for (int k = -2; k <= 2; ++k) s += kBinomial[k + 2] * tmp(reflect(r + k, h), c);
      out(r, c) = s;
    }
  }
  return out;
}

Image reduce(const Image& img) {
  const int w = (img.width() + 1) / 2, h = (img.height() + 1) / 2;
  Image out(w, h, img.channel_count());
  for (int ch = 0; ch < img.channel_count(); ++ch) {
    const Plane b = blur(img[ch]);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) out[ch](r, c) = b(2 * r, 2 * c);
    }
  }
  return out;
}

Image expand(const Image& img, int w, int h) {
  Image out(w, h, img.channel_count());
  for (int ch = 0; ch < img.channel_count(); ++ch) {
    Plane up = Plane::Zero(h, w);
    for (int r = 0; r < img.height() && 2 * r < h; ++r) {
      for (int c = 0; c < img.width() && 2 * c < w; ++c) up(2 * r, 2 * c) = 4.0 * img[ch](r, c);
    }
    out[ch] = blur(up);
  }
  return out;
}

Image subtract(const Image& a, const Image& b) {
  Image out = a;
  for (int c = 0; c < a.channel_count(); ++c) out[c] -= b[c];
  return out;
}

}  // namespace

void DenoiseConfig::validate() const {
  if (levels < 1) throw std::invalid_argument("pyramid needs at least one level");
  if (patch_size < 1 || patch_size % 2 == 0) {
    throw std::invalid_argument("patch size must be odd and positive");
  }
  if (search_radius < 0) throw std::invalid_argument("search radius must be non-negative");
  if (!(h_fine > 0.0) || !(h_coarse > 0.0)) throw std::invalid_argument("h must be positive");
}

std::vector<Image> laplacian_pyramid(const Image& img, int levels) {
  if (levels < 1) throw std::invalid_argument("pyramid needs at least one level");
  std::vector<Image> bands;
  Image g = img;
  for (int k = 0; k + 1 < levels; ++k) {
    Image next = reduce(g);
    bands.push_back(subtract(g, expand(next, g.width(), g.height())));
    g = std::move(next);
  }
  bands.push_back(std::move(g));
  return bands;
}

Image reconstruct_pyramid(const std::vector<Image>& bands) {
  if (bands.empty()) throw std::invalid_argument("empty pyramid");
  Image g = bands.back();
  for (int k = static_cast<int>(bands.size()) - 2; k >= 0; --k) {
    Image up = expand(g, bands[k].width(), bands[k].height());
    for (int c = 0; c < up.channel_count(); ++c) up[c] += bands[k][c];
    g = std::move(up);
  }
  return g;
}

double mad_sigma(const Image& band) {
  std::vector<double> v;
  for (int c = 0; c < band.channel_count(); ++c) {
    const Plane& p = band[c];
    for (Eigen::Index i = 0; i < p.size(); ++i) v.push_back(std::abs(p.data()[i]));
  }
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid / 0.6745;
}

double estimate_noise_sigma(const Image& img) {
  const int w = img.width() / 2, h = img.height() / 2;
  if (w == 0 || h == 0) return 0.0;
  Image diag(w, h, img.channel_count());
  for (int c = 0; c < img.channel_count(); ++c) {
    const Plane& p = img[c];
    for (int r = 0; r < h; ++r) {
      for (int k = 0; k < w; ++k) {
        diag[c](r, k) = 0.5 * (p(2 * r, 2 * k) - p(2 * r, 2 * k + 1) - p(2 * r + 1, 2 * k) +
                               p(2 * r + 1, 2 * k + 1));
      }
    }
  }
  return mad_sigma(diag);
}

Image nlmeans(const Image& img, int patch_size, int search_radius, double h, double sigma_n,
              int workers) {
  const int w = img.width(), ht = img.height(), nc = img.channel_count();
  if (w < patch_size || ht < patch_size) {
    throw std::invalid_argument("image smaller than the patch");
  }
  if (!(h > 0.0)) throw std::invalid_argument("h must be positive");
  const int half = patch_size / 2;
  const int pad = half + search_radius;
  const int pw = w + 2 * pad, ph = ht + 2 * pad;

  // Reflect-padded planes so inner loops skip bounds checks.
  std::vector<Plane> padded(nc, Plane(ph, pw));
  for (int c = 0; c < nc; ++c) {
    for (int r = 0; r < ph; ++r) {
      for (int col = 0; col < pw; ++col) {
        padded[c](r, col) = img[c](reflect(r - pad, ht), reflect(col - pad, w));
      }
    }
  }
  // Gaussian patch weights, normalized over the patch and channels.
  const double gs = std::max(0.5, patch_size / 4.0);
  std::vector<double> kernel;
  double ksum = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      kernel.push_back(std::exp(-(dx * dx + dy * dy) / (2 * gs * gs)));
      ksum += kernel.back();
    }
  }
  for (double& k : kernel) k /= ksum * nc;

  const double h2 = h * h, floor2 = 2.0 * sigma_n * sigma_n;
  Image out(w, ht, nc);
  parallel_for(ht, workers, [&](int, int r) {
    std::vector<double> acc(nc);
    for (int col = 0; col < w; ++col) {
      const int pr = r + pad, pc = col + pad;
      std::fill(acc.begin(), acc.end(), 0.0);
      double wsum = 0.0;
      for (int sy = -search_radius; sy <= search_radius; ++sy) {
        for (int sx = -search_radius; sx <= search_radius; ++sx) {
          double d2 = 0.0;
          for (int c = 0; c < nc; ++c) {
            const Plane& p = padded[c];
            int k = 0;
            for (int dy = -half; dy <= half; ++dy) {
              for (int dx = -half; dx <= half; ++dx, ++k) {
                const double diff = p(pr + dy, pc + dx) - p(pr + sy + dy, pc + sx + dx);
                d2 += kernel[k] * diff * diff;
              }
            }
          }
          const double wt = std::exp(-std::max(d2 - floor2, 0.0) / h2);
          wsum += wt;
          for (int c = 0; c < nc; ++c) acc[c] += wt * padded[c](pr + sy, pc + sx);
        }
      }
      for (int c = 0; c < nc; ++c) out[c](r, col) = acc[c] / wsum;
    }
  });
  return out;
}

Image nlmeans_denoise(const Image& img, const DenoiseConfig& cfg) {
  cfg.validate();
  if (img.width() < cfg.patch_size || img.height() < cfg.patch_size) {
    throw std::invalid_argument("image smaller than the patch");
  }
  const Image encoded = to_srgb(img);
  std::vector<Image> bands = laplacian_pyramid(encoded, cfg.levels);
  const double sigma_fine = cfg.sigma_n >= 0.0 ? cfg.sigma_n / 255.0 : estimate_noise_sigma(encoded);
  double sigma = sigma_fine;
  for (std::size_t k = 0; k < bands.size(); ++k) {
    const double h = (k == 0 ? cfg.h_fine : cfg.h_coarse) / 255.0;
    // Bands too small for a patch are kept as they are.
    if (bands[k].width() >= cfg.patch_size && bands[k].height() >= cfg.patch_size) {
      bands[k] = nlmeans(bands[k], cfg.patch_size, cfg.search_radius, h, sigma, cfg.workers);
    }
    sigma *= kLevelNoiseFactor;
  }
  Image out = reconstruct_pyramid(bands);
  for (int c = 0; c < out.channel_count(); ++c) {
    out[c] = out[c].unaryExpr([](double v) { return srgb_decode(std::clamp(v, 0.0, 1.0)); });
  }
  return out;
}

}  // namespace smoothc
