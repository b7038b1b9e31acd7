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

// Overlapping patch grids and the DC pyramid.
//
// A patch grid over an H x W image with side p and step e has floor(H/e) x
// floor(W/e) positions; patch (u1, u2) has its top-left corner at (e*u1, e*u2).
// Reads past the bottom/right edge replicate the edge pixel, and overlap_add
// folds those contributions back onto the pixel they replicated. When p == e
// does not divide the image (or a coarse step leaves a strip), some pixels are
// covered by no patch; each pyramid level keeps those in `uncovered` so that
// collapse(build(img)) is exact.

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "xsep/image.hpp"
#include "xsep/numerics.hpp"

namespace xsep {

struct ScaleParams {
  std::size_t patch_side = 8;
  std::size_t step = 4;

  std::size_t patch_dim() const { return patch_side * patch_side; }
  bool operator==(const ScaleParams&) const = default;
};

/// Patches stored one per column of `patches`, row-major over (u1, u2).
struct PatchGrid {
  std::size_t patch_side = 0;
  std::size_t step = 0;
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  Mat patches;

  std::size_t count() const { return grid_h * grid_w; }
  std::size_t patch_dim() const { return patch_side * patch_side; }
  auto patch(std::size_t i) { return patches.col(static_cast<Eigen::Index>(i)); }
  auto patch(std::size_t i) const { return patches.col(static_cast<Eigen::Index>(i)); }
};

namespace detail {

inline void check_grid_params(std::size_t h, std::size_t w, std::size_t patch_side,
                              std::size_t step, const std::string& where) {
  require(step >= 1 && patch_side >= 1, where + ": patch side and step must be positive");
  require(step <= patch_side, where + ": step " + std::to_string(step) +
                                  " exceeds patch side " + std::to_string(patch_side));
  require(patch_side <= std::min(h, w), where + ": patch side " + std::to_string(patch_side) +
                                            " exceeds image side (" + std::to_string(h) + "x" +
                                            std::to_string(w) + ")");
}

inline void check_grid_shape(const PatchGrid& g, std::size_t h, std::size_t w,
                             const std::string& where) {
  check_grid_params(h, w, g.patch_side, g.step, where);
  require(g.grid_h == h / g.step && g.grid_w == w / g.step,
          where + ": grid " + std::to_string(g.grid_h) + "x" + std::to_string(g.grid_w) +
              " does not match image " + std::to_string(h) + "x" + std::to_string(w) +
              " at step " + std::to_string(g.step));
  require(static_cast<std::size_t>(g.patches.rows()) == g.patch_dim() &&
              static_cast<std::size_t>(g.patches.cols()) == g.count(),
          where + ": patch matrix has wrong shape");
}

// Patches read rows (or columns) [0, extent) of a side of length n.
inline std::size_t covered_extent(std::size_t n, std::size_t patch_side, std::size_t step) {
  const std::size_t g = n / step;
  return std::min(n, step * (g - 1) + patch_side);
}

}  // namespace detail

inline PatchGrid extract_patches(const Image& img, std::size_t patch_side, std::size_t step) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  detail::check_grid_params(h, w, patch_side, step, "extract_patches");
  PatchGrid g;
  g.patch_side = patch_side;
  g.step = step;
  g.grid_h = h / step;
  g.grid_w = w / step;
  g.patches.resize(static_cast<Eigen::Index>(patch_side * patch_side),
                   static_cast<Eigen::Index>(g.count()));
  for (std::size_t u1 = 0; u1 < g.grid_h; ++u1)
    for (std::size_t u2 = 0; u2 < g.grid_w; ++u2) {
      auto col = g.patch(u1 * g.grid_w + u2);
      for (std::size_t i = 0; i < patch_side; ++i) {
        const std::size_t r = std::min(step * u1 + i, h - 1);
        for (std::size_t j = 0; j < patch_side; ++j) {
          const std::size_t c = std::min(step * u2 + j, w - 1);
          col(static_cast<Eigen::Index>(i * patch_side + j)) = img(r, c);
        }
      }
    }
  return g;
}

/// Splits a patch into its zero-mean texture and its mean.
inline std::pair<Vec, double> remove_dc(const Vec& patch) {
  require(patch.size() >= 1, "remove_dc: empty patch");
  const double dc = patch.mean();
  Vec tex = patch.array() - dc;
  return {std::move(tex), dc};
}

/// Places one DC value per grid position into a grid_h x grid_w image.
inline Image assemble_dc_image(std::size_t grid_h, std::size_t grid_w, const Vec& dcs) {
  require(static_cast<std::size_t>(dcs.size()) == grid_h * grid_w,
          "assemble_dc_image: expected " + std::to_string(grid_h * grid_w) + " DC values, got " +
              std::to_string(dcs.size()));
  Image out(grid_h, grid_w);
  for (std::size_t u1 = 0; u1 < grid_h; ++u1)
    for (std::size_t u2 = 0; u2 < grid_w; ++u2)
      out(u1, u2) = dcs(static_cast<Eigen::Index>(u1 * grid_w + u2));
  return out;
}

/// Averages every patch value covering each pixel (weight 1 per covering
/// patch, edge-replicated reads folded back). Pixels no patch covers are 0.
inline Image overlap_add(const PatchGrid& g, std::size_t h, std::size_t w) {
  detail::check_grid_shape(g, h, w, "overlap_add");
  Image acc(h, w);
  std::vector<unsigned> weight(h * w, 0);
  const std::size_t p = g.patch_side;
  for (std::size_t u1 = 0; u1 < g.grid_h; ++u1)
    for (std::size_t u2 = 0; u2 < g.grid_w; ++u2) {
      auto col = g.patch(u1 * g.grid_w + u2);
      for (std::size_t i = 0; i < p; ++i) {
        const std::size_t r = std::min(g.step * u1 + i, h - 1);
        for (std::size_t j = 0; j < p; ++j) {
          const std::size_t c = std::min(g.step * u2 + j, w - 1);
          acc(r, c) += col(static_cast<Eigen::Index>(i * p + j));
          ++weight[r * w + c];
        }
      }
    }
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      if (weight[r * w + c] > 0) acc(r, c) /= static_cast<double>(weight[r * w + c]);
  return acc;
}

/// Overlap-add of constant patches, patch (u1, u2) = lowpass(u1, u2).
inline Image upsample_lowpass(const Image& lowpass, std::size_t h, std::size_t w,
                              std::size_t patch_side, std::size_t step) {
  detail::check_grid_params(h, w, patch_side, step, "upsample_lowpass");
  require(lowpass.height() == h / step && lowpass.width() == w / step,
          "upsample_lowpass: low-pass is " + shape_string(lowpass) + ", expected " +
              std::to_string(h / step) + "x" + std::to_string(w / step));
  PatchGrid g;
  g.patch_side = patch_side;
  g.step = step;
  g.grid_h = lowpass.height();
  g.grid_w = lowpass.width();
  g.patches.resize(static_cast<Eigen::Index>(patch_side * patch_side),
                   static_cast<Eigen::Index>(g.count()));
  for (std::size_t u1 = 0; u1 < g.grid_h; ++u1)
    for (std::size_t u2 = 0; u2 < g.grid_w; ++u2)
      g.patch(u1 * g.grid_w + u2).setConstant(lowpass(u1, u2));
  return overlap_add(g, h, w);
}

/// True if at least one patch of the grid reads pixel (r, c).
inline bool is_covered(std::size_t r, std::size_t c, std::size_t h, std::size_t w,
                       const ScaleParams& sp) {
  return r < detail::covered_extent(h, sp.patch_side, sp.step) &&
         c < detail::covered_extent(w, sp.patch_side, sp.step);
}

struct PyramidLevel {
  std::size_t scale = 1;  // 1-based, finest first
  PatchGrid texture;      // DC-free patches
  Image lowpass;          // grid_h x grid_w DC image
  std::size_t source_h = 0;
  std::size_t source_w = 0;
  Image uncovered;  // source pixels no patch reads, zero elsewhere

  ScaleParams params() const { return {texture.patch_side, texture.step}; }
};

struct Pyramid {
  std::vector<PyramidLevel> levels;
  Image coarsest;  // low-pass of the last level

  std::size_t depth() const { return levels.size(); }
};

namespace detail {

inline PyramidLevel decompose_level(const Image& img, const ScaleParams& sp, std::size_t scale) {
  PyramidLevel lvl;
  lvl.scale = scale;
  lvl.source_h = img.height();
  lvl.source_w = img.width();
  lvl.texture = extract_patches(img, sp.patch_side, sp.step);
  Vec dcs(static_cast<Eigen::Index>(lvl.texture.count()));
  for (std::size_t i = 0; i < lvl.texture.count(); ++i) {
    auto col = lvl.texture.patch(i);
    const double dc = col.mean();
    col.array() -= dc;
    dcs(static_cast<Eigen::Index>(i)) = dc;
  }
  lvl.lowpass = assemble_dc_image(lvl.texture.grid_h, lvl.texture.grid_w, dcs);
  lvl.uncovered = Image(img.height(), img.width());
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      if (!is_covered(r, c, img.height(), img.width(), sp)) lvl.uncovered(r, c) = img(r, c);
  return lvl;
}

}  // namespace detail

/// Decomposes img into levels.size() == scales.size() levels; level l + 1
/// decomposes the low-pass of level l.
inline Pyramid build_pyramid(const Image& img, const std::vector<ScaleParams>& scales) {
  require(!scales.empty(), "build_pyramid: need at least one scale");
  Pyramid pyr;
  Image current = img;
  for (std::size_t l = 0; l < scales.size(); ++l) {
    const auto& sp = scales[l];
    if (sp.patch_side > std::min(current.height(), current.width()))
      throw ContractViolation("build_pyramid: level " + std::to_string(l + 1) + " input is " +
                              shape_string(current) + ", smaller than patch side " +
                              std::to_string(sp.patch_side));
    pyr.levels.push_back(detail::decompose_level(current, sp, l + 1));
    current = pyr.levels.back().lowpass;
  }
  pyr.coarsest = std::move(current);
  return pyr;
}

/// Inverse of build_pyramid: from the coarsest low-pass, upsample and add each
/// level's overlap-added texture and its uncovered pixels.
inline Image collapse_pyramid(const std::vector<PyramidLevel>& levels, const Image& coarsest) {
  require(!levels.empty(), "collapse_pyramid: no levels");
  Image current = coarsest;
  for (std::size_t k = levels.size(); k-- > 0;) {
    const auto& lvl = levels[k];
    const auto& g = lvl.texture;
    if (current.height() != g.grid_h || current.width() != g.grid_w)
      throw ContractViolation("collapse_pyramid: level " + std::to_string(k + 1) +
                              " expects a " + std::to_string(g.grid_h) + "x" +
                              std::to_string(g.grid_w) + " low-pass, got " +
                              shape_string(current));
    Image img = overlap_add(g, lvl.source_h, lvl.source_w);
    img += upsample_lowpass(current, lvl.source_h, lvl.source_w, g.patch_side, g.step);
    if (!lvl.uncovered.empty()) img += lvl.uncovered;
    current = std::move(img);
  }
  return current;
}

inline Image collapse_pyramid(const Pyramid& pyr) {
  return collapse_pyramid(pyr.levels, pyr.coarsest);
}

}  // namespace xsep
