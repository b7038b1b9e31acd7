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

// X-ray separation guided by visual side information, plus the MCA baseline.
//
// Per patch, the mixed texture m and the visual textures y1, y2 are coded
// jointly:
//
//   [ m  ]   [ phi_c  phi_c  2 phi ] [ z1 ]
//   [ y1 ] = [ psi_c    0      0   ] [ z2 ]
//   [ y2 ]   [   0    psi_c    0   ] [ v  ]
//
// with budgets (s_z, s_z, s_v), and each side is rebuilt as phi_c * z_i. The
// shared innovation v is fitted but left out of both sides.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "xsep/dictlearn.hpp"
#include "xsep/image.hpp"
#include "xsep/numerics.hpp"
#include "xsep/parallel.hpp"
#include "xsep/patching.hpp"
#include "xsep/sparse.hpp"

namespace xsep {

struct SeparationConfig {
  std::vector<ScaleParams> scales{{8, 4}, {8, 4}, {8, 7}};
  std::size_t s_z = 10;
  std::size_t s_v = 8;
  double lowpass_split = 0.5;  // share of unseparated low-pass content given to side 1

  void validate() const {
    require(!scales.empty(), "SeparationConfig: need at least one scale");
    for (const auto& sp : scales)
      require(sp.step >= 1 && sp.step <= sp.patch_side,
              "SeparationConfig: each scale needs 1 <= step <= patch side");
    require(lowpass_split >= 0.0 && lowpass_split <= 1.0,
            "SeparationConfig: lowpass_split must lie in [0, 1]");
  }
};

/// Column-normalized stacked dictionary shared by every patch of one scale.
struct StackedOperator {
  Mat theta;  // 3n x (2 gamma + d), unit columns
  Vec scales;
  BudgetPartition partition;
  Mat phi_c;
  Mat phi;

  std::size_t patch_dim() const { return static_cast<std::size_t>(phi_c.rows()); }
  std::size_t common_atoms() const { return static_cast<std::size_t>(phi_c.cols()); }
  Mat raw_theta() const { return theta * scales.asDiagonal(); }
};

inline StackedOperator stacked_operator(const CoupledDictionaryTriple& dicts, std::size_t s_z,
                                        std::size_t s_v) {
  const auto n = static_cast<Eigen::Index>(dicts.patch_dim());
  const auto g = static_cast<Eigen::Index>(dicts.common_atoms());
  const auto d = static_cast<Eigen::Index>(dicts.innovation_atoms());
  require(dicts.phi_c.rows() == n && dicts.phi.rows() == n && dicts.phi_c.cols() == g,
          "stacked_operator: inconsistent dictionary shapes");
  Mat raw = Mat::Zero(3 * n, 2 * g + d);
  raw.block(0, 0, n, g) = dicts.phi_c;
  raw.block(0, g, n, g) = dicts.phi_c;
  raw.block(0, 2 * g, n, d) = 2.0 * dicts.phi;
  raw.block(n, 0, n, g) = dicts.psi_c;
  raw.block(2 * n, g, n, g) = dicts.psi_c;
  StackedOperator op;
  std::tie(op.theta, op.scales) = normalize_columns(raw);
  op.partition = BudgetPartition::contiguous({{static_cast<std::size_t>(g), s_z},
                                              {static_cast<std::size_t>(g), s_z},
                                              {static_cast<std::size_t>(d), s_v}});
  op.phi_c = dicts.phi_c;
  op.phi = dicts.phi;
  return op;
}

struct StackedSystem {
  Vec b;  // [m; y1; y2]
  StackedOperator op;
};

inline Vec stack_observations(const Vec& m, const Vec& y1, const Vec& y2) {
  require(m.size() == y1.size() && m.size() == y2.size(),
          "stack_observations: m, y1, y2 must have equal length");
  Vec b(3 * m.size());
  b << m, y1, y2;
  return b;
}

inline StackedSystem build_stacked_system(const Vec& m, const Vec& y1, const Vec& y2,
                                          const CoupledDictionaryTriple& dicts, std::size_t s_z,
                                          std::size_t s_v) {
  require(static_cast<std::size_t>(m.size()) == dicts.patch_dim(),
          "build_stacked_system: patch length " + std::to_string(m.size()) +
              " does not match dictionary rows " + std::to_string(dicts.patch_dim()));
  return {stack_observations(m, y1, y2), stacked_operator(dicts, s_z, s_v)};
}

struct PatchSeparation {
  Vec side1;  // phi_c z1
  Vec side2;  // phi_c z2
  Vec innovation;  // phi v (not part of either side)
  SparseCode z1, z2, v;
  std::vector<double> residual_norms;
};

namespace detail {

inline bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

inline SparseCode unscale(const SparseCode& code, const Vec& scales, std::size_t first,
                          std::size_t count) {
  SparseCode out = code.slice(first, count);
  for (auto& e : out.entries) e.value /= scales(static_cast<Eigen::Index>(first + e.index));
  return out;
}

inline Vec apply(const Mat& dict, const SparseCode& code) {
  Vec out = Vec::Zero(dict.rows());
  for (const auto& e : code.entries) out += e.value * dict.col(static_cast<Eigen::Index>(e.index));
  return out;
}

}  // namespace detail

/// Separates one texture patch. The pursuit always runs with the two visual
/// blocks in a canonical (lexicographic) order, so swapping y1 and y2 swaps
/// the outputs exactly.
inline PatchSeparation separate_patch(const StackedOperator& op, const Vec& m, const Vec& y1,
                                      const Vec& y2) {
  require(static_cast<std::size_t>(m.size()) == op.patch_dim(),
          "separate_patch: patch length does not match dictionaries");
  const bool swapped = detail::lex_less(y2, y1);
  const Vec b = swapped ? stack_observations(m, y2, y1) : stack_observations(m, y1, y2);
  const PursuitResult res = budgeted_omp(op.theta, b, op.partition);
  const std::size_t g = op.common_atoms();
  const std::size_t d = op.partition.dim() - 2 * g;
  PatchSeparation out;
  SparseCode first = detail::unscale(res.code, op.scales, 0, g);
  SparseCode second = detail::unscale(res.code, op.scales, g, g);
  if (swapped) std::swap(first, second);
  out.z1 = std::move(first);
  out.z2 = std::move(second);
  out.v = detail::unscale(res.code, op.scales, 2 * g, d);
  out.side1 = detail::apply(op.phi_c, out.z1);
  out.side2 = detail::apply(op.phi_c, out.z2);
  out.innovation = detail::apply(op.phi, out.v);
  out.residual_norms = res.residual_norms;
  return out;
}

inline PatchSeparation separate_patch(const Vec& m, const Vec& y1, const Vec& y2,
                                      const CoupledDictionaryTriple& dicts, std::size_t s_z,
                                      std::size_t s_v) {
  const StackedSystem sys = build_stacked_system(m, y1, y2, dicts, s_z, s_v);
  return separate_patch(sys.op, m, y1, y2);
}

struct SeparationStats {
  std::size_t pursuits = 0;
  std::vector<std::size_t> max_block_support;  // per partition block, over all patches
  std::vector<std::size_t> block_budget;
  bool budgets_respected = true;
};

struct SeparationResult {
  Image side1;
  Image side2;
  Image innovation;  // collapsed phi v texture (proposed method only)
  SeparationStats stats;
};

namespace detail {

struct PatchOutcome {
  Vec side1;
  Vec side2;
  Vec innovation;
  std::vector<std::size_t> block_support;
};

// Shared multi-scale driver: per level, per patch, `solve(level, patch)`
// returns the two side textures; unseparated content (coarsest low-pass and
// uncovered pixels) is apportioned by `split`.
template <class Solve>
SeparationResult separate_multiscale(const Pyramid& pm, double split,
                                     std::vector<std::size_t> budgets, Solve&& solve) {
  std::vector<PyramidLevel> lv1 = pm.levels;
  std::vector<PyramidLevel> lv2 = pm.levels;
  std::vector<PyramidLevel> lvv = pm.levels;
  SeparationStats stats;
  stats.block_budget = budgets;
  stats.max_block_support.assign(budgets.size(), 0);

  for (std::size_t k = 0; k < pm.levels.size(); ++k) {
    const std::size_t count = pm.levels[k].texture.count();
    std::vector<PatchOutcome> outcomes(count);
    parallel_for(count, [&](std::size_t i) { outcomes[i] = solve(k, i); });
    for (std::size_t i = 0; i < count; ++i) {
      const auto& o = outcomes[i];
      lv1[k].texture.patch(i) = o.side1;
      lv2[k].texture.patch(i) = o.side2;
      if (o.innovation.size() > 0)
        lvv[k].texture.patch(i) = o.innovation;
      else
        lvv[k].texture.patch(i).setZero();
      for (std::size_t b = 0; b < o.block_support.size(); ++b) {
        stats.max_block_support[b] = std::max(stats.max_block_support[b], o.block_support[b]);
        if (o.block_support[b] > budgets[b]) stats.budgets_respected = false;
      }
    }
    stats.pursuits += count;
    lv1[k].uncovered *= split;
    lv2[k].uncovered *= 1.0 - split;
    lvv[k].uncovered *= 0.0;
  }
  SeparationResult out;
  out.side1 = collapse_pyramid(lv1, pm.coarsest * split);
  out.side2 = collapse_pyramid(lv2, pm.coarsest * (1.0 - split));
  out.innovation = collapse_pyramid(lvv, pm.coarsest * 0.0);
  out.stats = std::move(stats);
  return out;
}

template <class T>
const T& for_level(const std::vector<T>& per_scale, std::size_t level) {
  return per_scale[std::min(level, per_scale.size() - 1)];
}

}  // namespace detail

/// Multi-scale guided separation of mixed X-ray `m` with visuals y1, y2.
/// dicts_per_scale[l] serves level l; levels beyond the list re-use the last
/// triple.
inline SeparationResult separate_image(const Image& m, const Image& y1, const Image& y2,
                                       const std::vector<CoupledDictionaryTriple>& dicts_per_scale,
                                       const SeparationConfig& cfg) {
  cfg.validate();
  require(m.same_shape(y1) && m.same_shape(y2),
          "separate_image: mixed " + shape_string(m) + ", visual 1 " + shape_string(y1) +
              ", visual 2 " + shape_string(y2) + " must have the same size");
  require(!dicts_per_scale.empty(), "separate_image: no dictionaries");
  std::vector<StackedOperator> ops;
  for (std::size_t l = 0; l < cfg.scales.size(); ++l) {
    const auto& dicts = detail::for_level(dicts_per_scale, l);
    require(dicts.patch_dim() == cfg.scales[l].patch_dim(),
            "separate_image: scale " + std::to_string(l + 1) + " dictionaries have " +
                std::to_string(dicts.patch_dim()) + " rows, patches have " +
                std::to_string(cfg.scales[l].patch_dim()) + " pixels");
    ops.push_back(stacked_operator(dicts, cfg.s_z, cfg.s_v));
  }
  const Pyramid p1 = build_pyramid(y1, cfg.scales);
  const Pyramid p2 = build_pyramid(y2, cfg.scales);
  const Pyramid pm = build_pyramid(m, cfg.scales);
  return detail::separate_multiscale(
      pm, cfg.lowpass_split, {cfg.s_z, cfg.s_z, cfg.s_v},
      [&](std::size_t k, std::size_t i) {
        const PatchSeparation ps =
            separate_patch(ops[k], pm.levels[k].texture.patch(i), p1.levels[k].texture.patch(i),
                           p2.levels[k].texture.patch(i));
        return detail::PatchOutcome{ps.side1, ps.side2, ps.innovation,
                                    {ps.z1.nnz(), ps.z2.nnz(), ps.v.nnz()}};
      });
}

/// Two-dictionary MCA operator for one scale, x = lambda1 z1 + lambda2 z2.
struct McaOperator {
  Mat theta;
  Vec scales;
  BudgetPartition partition;
  Mat lambda1;
  Mat lambda2;
  bool swapped = false;  // pursuit runs on [lambda2 lambda1]
};

inline McaOperator mca_operator(const Mat& lambda1, const Mat& lambda2, std::size_t s1,
                                std::size_t s2) {
  require(lambda1.rows() == lambda2.rows(), "mca_operator: dictionaries disagree on rows");
  McaOperator op;
  op.lambda1 = lambda1;
  op.lambda2 = lambda2;
  // Canonical block order keeps swapped inputs producing swapped outputs.
  op.swapped = lambda2.cols() < lambda1.cols() ||
               (lambda2.cols() == lambda1.cols() &&
                std::lexicographical_compare(lambda2.data(), lambda2.data() + lambda2.size(),
                                             lambda1.data(), lambda1.data() + lambda1.size()));
  const Mat& a = op.swapped ? lambda2 : lambda1;
  const Mat& b = op.swapped ? lambda1 : lambda2;
  Mat raw(a.rows(), a.cols() + b.cols());
  raw << a, b;
  std::tie(op.theta, op.scales) = normalize_columns(raw);
  op.partition = BudgetPartition::contiguous({{static_cast<std::size_t>(a.cols()), op.swapped ? s2 : s1},
                                              {static_cast<std::size_t>(b.cols()), op.swapped ? s1 : s2}});
  return op;
}

struct McaPatch {
  Vec side1;
  Vec side2;
  SparseCode z1, z2;
};

inline McaPatch mca_patch(const McaOperator& op, const Vec& m) {
  const PursuitResult res = budgeted_omp(op.theta, m, op.partition);
  const auto na = static_cast<std::size_t>(op.partition.block(0).indices.size());
  const auto nb = static_cast<std::size_t>(op.partition.block(1).indices.size());
  SparseCode a = detail::unscale(res.code, op.scales, 0, na);
  SparseCode b = detail::unscale(res.code, op.scales, na, nb);
  McaPatch out;
  out.z1 = op.swapped ? std::move(b) : std::move(a);
  out.z2 = op.swapped ? std::move(a) : std::move(b);
  out.side1 = detail::apply(op.lambda1, out.z1);
  out.side2 = detail::apply(op.lambda2, out.z2);
  return out;
}

/// Multi-scale MCA baseline: per patch, budgeted pursuit over [lambda1 lambda2]
/// with budgets (s1, s2). Uses cfg.scales and cfg.lowpass_split.
inline SeparationResult mca_separate(const Image& m, const std::vector<Mat>& lambda1,
                                     const std::vector<Mat>& lambda2, std::size_t s1,
                                     std::size_t s2, const SeparationConfig& cfg) {
  cfg.validate();
  require(!lambda1.empty() && !lambda2.empty(), "mca_separate: no dictionaries");
  std::vector<McaOperator> ops;
  for (std::size_t l = 0; l < cfg.scales.size(); ++l) {
    const Mat& l1 = detail::for_level(lambda1, l);
    const Mat& l2 = detail::for_level(lambda2, l);
    require(static_cast<std::size_t>(l1.rows()) == cfg.scales[l].patch_dim() &&
                static_cast<std::size_t>(l2.rows()) == cfg.scales[l].patch_dim(),
            "mca_separate: scale " + std::to_string(l + 1) +
                " dictionaries do not match the patch size");
    ops.push_back(mca_operator(l1, l2, s1, s2));
  }
  const Pyramid pm = build_pyramid(m, cfg.scales);
  return detail::separate_multiscale(
      pm, cfg.lowpass_split, {s1, s2}, [&](std::size_t k, std::size_t i) {
        const McaPatch mp = mca_patch(ops[k], pm.levels[k].texture.patch(i));
        return detail::PatchOutcome{mp.side1, mp.side2, Vec(), {mp.z1.nnz(), mp.z2.nnz()}};
      });
}

}  // namespace xsep
