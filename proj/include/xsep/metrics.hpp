// Copyright 2026 The xsep Authors
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
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "xsep/image.hpp"
#include "xsep/numerics.hpp"

namespace xsep {

/// Structural similarity parameters. Defaults are the usual 11x11 Gaussian
/// window with sigma 1.5 and K = (0.01, 0.03).
struct SsimParams {
  std::size_t window_side = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  // Unset: max - min over both images (1 if both are the same constant).
  std::optional<double> dynamic_range;

  void validate() const {
    require(window_side % 2 == 1, "SsimParams: window side must be odd");
    require(sigma > 0.0, "SsimParams: sigma must be positive");
    require(k1 > 0.0 && k2 > 0.0, "SsimParams: k1 and k2 must be positive");
    require(!dynamic_range || *dynamic_range > 0.0, "SsimParams: dynamic range must be positive");
  }
};

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
inline std::vector<double> gaussian_taps(std::size_t side, double sigma) {
  std::vector<double> taps(side);
  const double c = static_cast<double>(side - 1) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < side; ++i) {
    const double x = static_cast<double>(i) - c;
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

inline double ssim_dynamic_range(const Image& a, const Image& b, const SsimParams& p) {
  if (p.dynamic_range) return *p.dynamic_range;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Image* img : {&a, &b})
    for (double v : img->pixels()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi > lo ? hi - lo : 1.0;
}

namespace detail {

// Valid-mode separable filtering of a row-major h x w buffer.
inline std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h,
                                        std::size_t w, const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t ow = w - k + 1;
  const std::size_t oh = h - k + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += taps[j] * src[r * w + c + j];
      tmp[r * ow + c] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r)
    for (std::size_t c = 0; c < ow; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += taps[i] * tmp[(r + i) * ow + c];
      out[r * ow + c] = s;
    }
  return out;
}

}  // namespace detail

/// Mean SSIM over all valid window positions.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
  p.validate();
  require(a.same_shape(b), "ssim: images are " + shape_string(a) + " and " + shape_string(b));
  require(a.height() >= p.window_side && a.width() >= p.window_side,
          "ssim: images smaller than the " + std::to_string(p.window_side) + "px window");
  const double range = ssim_dynamic_range(a, b, p);
  const double c1 = (p.k1 * range) * (p.k1 * range);
  const double c2 = (p.k2 * range) * (p.k2 * range);
  const auto taps = gaussian_taps(p.window_side, p.sigma);
  const std::size_t h = a.height();
  const std::size_t w = a.width();

  std::vector<double> va(a.pixels().begin(), a.pixels().end());
  std::vector<double> vb(b.pixels().begin(), b.pixels().end());
  std::vector<double> aa(va.size()), bb(va.size()), ab(va.size());
  for (std::size_t i = 0; i < va.size(); ++i) {
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
    ab[i] = va[i] * vb[i];
  }
  const auto mu_a = detail::filter_valid(va, h, w, taps);
  const auto mu_b = detail::filter_valid(vb, h, w, taps);
  const auto e_aa = detail::filter_valid(aa, h, w, taps);
  const auto e_bb = detail::filter_valid(bb, h, w, taps);
  const auto e_ab = detail::filter_valid(ab, h, w, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return total / static_cast<double>(mu_a.size());
}

struct MsePsnr {
  double mse = 0.0;
  double psnr = 0.0;  // +infinity when mse == 0
};

inline MsePsnr mse_psnr(const Image& a, const Image& b, double peak) {
  require(a.same_shape(b), "mse_psnr: images are " + shape_string(a) + " and " + shape_string(b));
  require(!a.empty(), "mse_psnr: empty images");
  double acc = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) acc += (pa[i] - pb[i]) * (pa[i] - pb[i]);
  MsePsnr out;
  out.mse = acc / static_cast<double>(pa.size());
  out.psnr = out.mse == 0.0 ? std::numeric_limits<double>::infinity()
                            : 10.0 * std::log10(peak * peak / out.mse);
  return out;
}

}  // namespace xsep
