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

// Synthetic double-sided scenes drawn from planted coupled dictionaries.
//
// Per scale a random triple (Psi_c, Phi_c, Phi) is planted. Side 1 draws its
// common codes from the first half of the common atoms, side 2 from the
// second half; one innovation code per patch position is shared by both
// sides. Each pyramid level is filled with planted texture patches
//   y_i = Psi_c z_i,   x_i = Phi_c z_i + Phi v
// and the levels are collapsed over a random coarsest low-pass. X-ray images
// are mapped into [0, 0.49] and quantized to 16 bits so the mixture
// m = x1 + x2 is exact in the quantized domain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "xsep/config.hpp"
#include "xsep/dictlearn.hpp"
#include "xsep/image.hpp"
#include "xsep/numerics.hpp"
#include "xsep/patching.hpp"
#include "xsep/sparse.hpp"

namespace xsep {

/// Random zero-mean, unit-norm columns.
inline Mat planted_atoms(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  require(n >= 2, "planted_atoms: need at least two rows for zero-mean atoms");
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = g(rng);
    a.col(c).array() -= a.col(c).mean();
  }
  return normalize_columns(a).first;
}

inline CoupledDictionaryTriple planted_triple(std::size_t n, std::size_t gamma, std::size_t d,
                                              std::mt19937_64& rng) {
  CoupledDictionaryTriple t;
  t.psi_c = planted_atoms(n, gamma, rng);
  t.phi_c = planted_atoms(n, gamma, rng);
  t.phi = planted_atoms(n, d, rng);
  return t;
}

/// `count` distinct atoms from [first, first + range), magnitudes in [0.5, 1]
/// with random sign. Entries are sorted by index.
inline SparseCode random_sparse_code(std::size_t dim, std::size_t first, std::size_t range,
                                     std::size_t count, std::mt19937_64& rng) {
  require(count <= range && first + range <= dim, "random_sparse_code: budget exceeds range");
  std::vector<std::size_t> pool(range);
  for (std::size_t i = 0; i < range; ++i) pool[i] = first + i;
  SparseCode code;
  code.dim = dim;
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, range - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }
  std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const double m = mag(rng);
    code.entries.push_back({pool[k], sign(rng) ? m : -m});
  }
  return code;
}

struct SynthScene {
  Image visual1, visual2;
  Image xray1, xray2;
  Image mixed;  // xray1 + xray2, exact on the 16-bit grid
  // Single-sided training panels with independent codes.
  Image train_visual1, train_visual2;
  Image train_xray1, train_xray2;
  std::vector<CoupledDictionaryTriple> truth;
  std::string codes;  // one line per planted patch of the mixture scene
};

namespace detail {

// Sizes of each level's source image for a square side.
inline std::vector<std::size_t> level_sizes(std::size_t side, const std::vector<ScaleParams>& scales) {
  std::vector<std::size_t> out{side};
  for (const auto& sp : scales) {
    require(out.back() >= sp.patch_side,
            "synth: level input " + std::to_string(out.back()) + "px is smaller than patch side " +
                std::to_string(sp.patch_side));
    out.push_back(out.back() / sp.step);
  }
  return out;
}

inline std::vector<PyramidLevel> empty_levels(const std::vector<std::size_t>& sizes,
                                              const std::vector<ScaleParams>& scales) {
  std::vector<PyramidLevel> levels(scales.size());
  for (std::size_t l = 0; l < scales.size(); ++l) {
    auto& lvl = levels[l];
    lvl.scale = l + 1;
    lvl.source_h = lvl.source_w = sizes[l];
    lvl.texture.patch_side = scales[l].patch_side;
    lvl.texture.step = scales[l].step;
    lvl.texture.grid_h = lvl.texture.grid_w = sizes[l + 1];
    lvl.texture.patches = Mat::Zero(static_cast<Eigen::Index>(scales[l].patch_dim()),
                                    static_cast<Eigen::Index>(lvl.texture.count()));
  }
  return levels;
}

inline Image random_lowpass(std::size_t side, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(side, side);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

inline void append_code(std::ostringstream& os, const char* name, const SparseCode& c) {
  os << ' ' << name << '=';
  for (std::size_t k = 0; k < c.entries.size(); ++k)
    os << (k ? "," : "") << c.entries[k].index << ':' << c.entries[k].value;
}

// Maps both images jointly so their union spans [0, top]; a constant pair
// maps to top / 2.
inline void fit_range(Image& a, Image& b, double top) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Image* img : {&a, &b})
    for (double v : img->pixels()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  for (Image* img : {&a, &b})
    for (double& v : img->pixels()) v = hi > lo ? (v - lo) / (hi - lo) * top : top / 2.0;
}

inline std::vector<std::uint32_t> quantize16(Image& img) {
  std::vector<std::uint32_t> q(img.size());
  auto px = img.pixels();
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = static_cast<std::uint32_t>(std::lround(std::clamp(px[i], 0.0, 1.0) * 65535.0));
    px[i] = static_cast<double>(q[i]) / 65535.0;
  }
  return q;
}

}  // namespace detail

/// Draws a synthetic scene of cfg.synth_size square pixels at cfg.scales,
/// with per-patch budgets (cfg.s_z, cfg.s_v) and dictionary sizes
/// (cfg.atoms_common, cfg.atoms_innovation). Needs s_z <= atoms_common / 2.
inline SynthScene synthesize(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t gamma = cfg.atoms_common;
  const std::size_t d = cfg.atoms_innovation;
  const std::size_t half = gamma / 2;
  require(cfg.s_z <= half, "synth: s_z = " + std::to_string(cfg.s_z) +
                               " exceeds half the common atoms (" + std::to_string(half) + ")");
  const auto sizes = detail::level_sizes(cfg.synth_size, cfg.scales);
  const std::size_t L = cfg.scales.size();
  std::mt19937_64 rng(seed);

  SynthScene out;
  for (std::size_t l = 0; l < L; ++l) {
    out.truth.push_back(planted_triple(cfg.scales[l].patch_dim(), gamma, d, rng));
    out.truth.back().scale = l + 1;
  }

  std::ostringstream codes;
  codes.precision(17);
  codes << "# level patch z1=atom:value,... z2=... v=...\n";

  // Mixture scene: both sides share v.
  {
    auto y1 = detail::empty_levels(sizes, cfg.scales), y2 = y1, x1 = y1, x2 = y1;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& t = out.truth[l];
      for (std::size_t i = 0; i < y1[l].texture.count(); ++i) {
        const SparseCode z1 = random_sparse_code(gamma, 0, half, cfg.s_z, rng);
        const SparseCode z2 = random_sparse_code(gamma, half, gamma - half, cfg.s_z, rng);
        const SparseCode v = random_sparse_code(d, 0, d, cfg.s_v, rng);
        const Vec dz1 = z1.to_dense(), dz2 = z2.to_dense(), dv = v.to_dense();
        const Vec inn = t.phi * dv;
        y1[l].texture.patch(i) = t.psi_c * dz1;
        y2[l].texture.patch(i) = t.psi_c * dz2;
        x1[l].texture.patch(i) = t.phi_c * dz1 + inn;
        x2[l].texture.patch(i) = t.phi_c * dz2 + inn;
        codes << (l + 1) << ' ' << i;
        detail::append_code(codes, "z1", z1);
        detail::append_code(codes, "z2", z2);
        detail::append_code(codes, "v", v);
        codes << '\n';
      }
    }
    const Image c1 = detail::random_lowpass(sizes[L], rng);
    const Image c2 = detail::random_lowpass(sizes[L], rng);
    out.visual1 = collapse_pyramid(y1, c1);
    out.visual2 = collapse_pyramid(y2, c2);
    out.xray1 = collapse_pyramid(x1, c1);
    out.xray2 = collapse_pyramid(x2, c2);
  }

  // Training panels, one per side, with their own codes.
  for (int side = 0; side < 2; ++side) {
    auto y = detail::empty_levels(sizes, cfg.scales), x = y;
    const std::size_t first = side == 0 ? 0 : half;
    const std::size_t range = side == 0 ? half : gamma - half;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& t = out.truth[l];
      for (std::size_t i = 0; i < y[l].texture.count(); ++i) {
        const Vec z = random_sparse_code(gamma, first, range, cfg.s_z, rng).to_dense();
        const Vec v = random_sparse_code(d, 0, d, cfg.s_v, rng).to_dense();
        y[l].texture.patch(i) = t.psi_c * z;
        x[l].texture.patch(i) = t.phi_c * z + t.phi * v;
      }
    }
    const Image c = detail::random_lowpass(sizes[L], rng);
    (side == 0 ? out.train_visual1 : out.train_visual2) = collapse_pyramid(y, c);
    (side == 0 ? out.train_xray1 : out.train_xray2) = collapse_pyramid(x, c);
  }

  detail::fit_range(out.visual1, out.visual2, 1.0);
  detail::fit_range(out.xray1, out.xray2, 0.49);
  detail::fit_range(out.train_visual1, out.train_visual2, 1.0);
  detail::fit_range(out.train_xray1, out.train_xray2, 0.49);
  for (Image* img : {&out.visual1, &out.visual2, &out.train_visual1, &out.train_visual2,
                     &out.train_xray1, &out.train_xray2})
    detail::quantize16(*img);
  const auto q1 = detail::quantize16(out.xray1);
  const auto q2 = detail::quantize16(out.xray2);
  out.mixed = Image(cfg.synth_size, cfg.synth_size);
  for (std::size_t i = 0; i < q1.size(); ++i)
    out.mixed.pixels()[i] = static_cast<double>(q1[i] + q2[i]) / 65535.0;
  out.codes = codes.str();
  return out;
}

}  // namespace xsep
