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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"
#include "xsep/separation.hpp"
#include "xsep/synth.hpp"

namespace xsep {
namespace {

using testing::constant_image;
using testing::random_image;
using testing::unit_columns;

TEST(StackedSystem, ExplicitSmallLayout) {
  CoupledDictionaryTriple t;
  t.psi_c = Mat(2, 1);
  t.psi_c << 1, 0;
  t.phi_c = Mat(2, 1);
  t.phi_c << 0, 1;
  t.phi = Mat(2, 1);
  t.phi << 1, 0;
  Vec m(2), y1(2), y2(2);
  m << 1, 2;
  y1 << 3, 4;
  y2 << 5, 6;
  const StackedSystem sys = build_stacked_system(m, y1, y2, t, 1, 1);
  Mat expected(6, 3);
  expected << 0, 0, 2,  //
      1, 1, 0,          //
      1, 0, 0,          //
      0, 0, 0,          //
      0, 1, 0,          //
      0, 0, 0;
  EXPECT_LE((sys.op.raw_theta() - expected).cwiseAbs().maxCoeff(), 1e-15);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(sys.op.theta.col(j).norm(), 1.0, 1e-15);
  Vec b(6);
  b << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(sys.b, b);
  EXPECT_EQ(sys.op.partition.block_count(), 3u);
}

TEST(StackedSystem, InnovationBlockIsTwicePhi) {
  std::mt19937_64 rng(1);
  CoupledDictionaryTriple t{unit_columns(9, 4, rng), unit_columns(9, 4, rng), unit_columns(9, 3, rng)};
  const StackedOperator op = stacked_operator(t, 2, 1);
  const Mat raw = op.raw_theta();
  EXPECT_LE((raw.block(0, 8, 9, 3) - 2.0 * t.phi).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((raw.block(0, 0, 9, 4) - t.phi_c).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((raw.block(0, 4, 9, 4) - t.phi_c).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((raw.block(9, 0, 9, 4) - t.psi_c).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((raw.block(18, 4, 9, 4) - t.psi_c).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(raw.block(9, 4, 9, 7).cwiseAbs().maxCoeff(), 0.0);
}

TEST(StackedSystem, ZeroDictionaryRejected) {
  CoupledDictionaryTriple t{Mat::Zero(4, 2), Mat::Zero(4, 2), Mat::Zero(4, 1)};
  EXPECT_THROW(stacked_operator(t, 1, 1), ContractViolation);
  std::mt19937_64 rng(2);
  CoupledDictionaryTriple ok{unit_columns(4, 2, rng), unit_columns(4, 2, rng), unit_columns(4, 1, rng)};
  EXPECT_THROW(build_stacked_system(Vec::Zero(5), Vec::Zero(5), Vec::Zero(5), ok, 1, 1),
               ContractViolation);
}

TEST(SeparatePatch, ZeroInputs) {
  std::mt19937_64 rng(3);
  const auto t = planted_triple(16, 32, 8, rng);
  const auto r = separate_patch(Vec::Zero(16), Vec::Zero(16), Vec::Zero(16), t, 2, 1);
  EXPECT_EQ(r.side1, Vec::Zero(16));
  EXPECT_EQ(r.side2, Vec::Zero(16));
}

TEST(SeparatePatch, PlantedRecovery) {
  std::mt19937_64 rng(4);
  const auto t = planted_triple(16, 32, 8, rng);
  const StackedOperator op = stacked_operator(t, 2, 1);
  std::vector<double> errors;
  for (int trial = 0; trial < 60; ++trial) {
    const Vec z1 = random_sparse_code(32, 0, 32, 2, rng).to_dense();
    const Vec z2 = random_sparse_code(32, 0, 32, 2, rng).to_dense();
    const Vec v = random_sparse_code(8, 0, 8, 1, rng).to_dense();
    const Vec x1 = t.phi_c * z1, x2 = t.phi_c * z2;
    const auto r = separate_patch(op, x1 + x2 + 2.0 * t.phi * v, t.psi_c * z1, t.psi_c * z2);
    errors.push_back((r.side1 - x1).norm() / x1.norm());
    errors.push_back((r.side2 - x2).norm() / x2.norm());
    EXPECT_LE(r.z1.nnz(), 2u);
    EXPECT_LE(r.z2.nnz(), 2u);
    EXPECT_LE(r.v.nnz(), 1u);
    for (std::size_t i = 1; i < r.residual_norms.size(); ++i)
      EXPECT_LE(r.residual_norms[i], r.residual_norms[i - 1] + 1e-12);
  }
  std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
  EXPECT_LE(errors[errors.size() / 2], 0.1);
}

TEST(SeparatePatch, SymmetricInstanceGivesEqualSides) {
  std::mt19937_64 rng(5);
  const auto t = planted_triple(16, 32, 8, rng);
  const Vec z = random_sparse_code(32, 0, 32, 2, rng).to_dense();
  const Vec y = t.psi_c * z;
  const auto r = separate_patch(2.0 * t.phi_c * z, y, y, t, 2, 1);
  EXPECT_LE((r.side1 - r.side2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((r.side1 - t.phi_c * z).norm(), 1e-8);
}

TEST(SeparatePatch, SwappingVisualsSwapsOutputsExactly) {
  std::mt19937_64 rng(6);
  const auto t = planted_triple(16, 32, 8, rng);
  const StackedOperator op = stacked_operator(t, 3, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec m = testing::gaussian_vector(16, rng);
    const Vec y1 = testing::gaussian_vector(16, rng), y2 = testing::gaussian_vector(16, rng);
    const auto a = separate_patch(op, m, y1, y2);
    const auto b = separate_patch(op, m, y2, y1);
    EXPECT_EQ(a.side1, b.side2);
    EXPECT_EQ(a.side2, b.side1);
    EXPECT_EQ(a.innovation, b.innovation);
  }
}

TEST(SeparatePatch, OneSidedMixture) {
  // m and y1 come from side 1, y2 is empty: side 2 stays at zero texture.
  std::mt19937_64 rng(7);
  const auto t = planted_triple(16, 32, 8, rng);
  const StackedOperator op = stacked_operator(t, 2, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec z = random_sparse_code(32, 0, 32, 2, rng).to_dense();
    const auto r = separate_patch(op, t.phi_c * z, t.psi_c * z, Vec::Zero(16));
    EXPECT_LE(r.side2.norm(), 1e-8 * (t.phi_c * z).norm());
    EXPECT_LE((r.side1 - t.phi_c * z).norm(), 1e-8 * (t.phi_c * z).norm());
  }
}

SeparationConfig small_config() {
  SeparationConfig cfg;
  cfg.scales = {{4, 2}, {4, 2}};
  cfg.s_z = 2;
  cfg.s_v = 1;
  return cfg;
}

std::vector<CoupledDictionaryTriple> small_dicts(std::mt19937_64& rng) {
  return {planted_triple(16, 12, 4, rng), planted_triple(16, 12, 4, rng)};
}

TEST(SeparateImage, ConstantMixtureSplitsInHalf) {
  std::mt19937_64 rng(8);
  const auto dicts = small_dicts(rng);
  const Image m = constant_image(30, 30, 0.8);
  const Image y = constant_image(30, 30, 0.4);
  const SeparationResult r = separate_image(m, y, y, dicts, small_config());
  for (double v : r.side1.pixels()) EXPECT_NEAR(v, 0.4, 1e-12);
  for (double v : r.side2.pixels()) EXPECT_NEAR(v, 0.4, 1e-12);
}

TEST(SeparateImage, LowpassSplitIsConfigurable) {
  std::mt19937_64 rng(9);
  const auto dicts = small_dicts(rng);
  SeparationConfig cfg = small_config();
  cfg.lowpass_split = 0.25;
  const Image m = constant_image(20, 20, 1.0), y = constant_image(20, 20, 0.0);
  const SeparationResult r = separate_image(m, y, y, dicts, cfg);
  EXPECT_NEAR(r.side1(5, 5), 0.25, 1e-12);
  EXPECT_NEAR(r.side2(5, 5), 0.75, 1e-12);
}

TEST(SeparateImage, SizeMismatchThrows) {
  std::mt19937_64 rng(10);
  const auto dicts = small_dicts(rng);
  EXPECT_THROW(separate_image(Image(20, 20), Image(20, 21), Image(20, 20), dicts, small_config()),
               ContractViolation);
}

TEST(SeparateImage, WrongDictionaryShapeThrows) {
  std::mt19937_64 rng(11);
  const std::vector<CoupledDictionaryTriple> dicts{planted_triple(9, 6, 2, rng)};
  EXPECT_THROW(separate_image(Image(20, 20), Image(20, 20), Image(20, 20), dicts, small_config()),
               ContractViolation);
}

TEST(SeparateImage, SwapSymmetry) {
  std::mt19937_64 rng(12);
  const auto dicts = small_dicts(rng);
  const Image m = random_image(24, 28, rng), y1 = random_image(24, 28, rng),
              y2 = random_image(24, 28, rng);
  const auto a = separate_image(m, y1, y2, dicts, small_config());
  const auto b = separate_image(m, y2, y1, dicts, small_config());
  EXPECT_EQ(a.side1, b.side2);
  EXPECT_EQ(a.side2, b.side1);
}

TEST(SeparateImage, BudgetsRespectedAndCounted) {
  std::mt19937_64 rng(13);
  const auto dicts = small_dicts(rng);
  const Image m = random_image(24, 24, rng), y1 = random_image(24, 24, rng),
              y2 = random_image(24, 24, rng);
  const auto r = separate_image(m, y1, y2, dicts, small_config());
  EXPECT_TRUE(r.stats.budgets_respected);
  EXPECT_EQ(r.stats.pursuits, 12u * 12u + 6u * 6u);
  EXPECT_EQ(r.stats.block_budget, (std::vector<std::size_t>{2, 2, 1}));
  for (std::size_t b = 0; b < 3; ++b) EXPECT_LE(r.stats.max_block_support[b], r.stats.block_budget[b]);
}

TEST(SeparateImage, IndependentOfWorkerCount) {
  std::mt19937_64 rng(14);
  const auto dicts = small_dicts(rng);
  const Image m = random_image(32, 32, rng), y1 = random_image(32, 32, rng),
              y2 = random_image(32, 32, rng);
  SeparationResult a, b;
  {
    testing::EnvGuard env("XSEP_THREADS", "1");
    a = separate_image(m, y1, y2, dicts, small_config());
  }
  {
    testing::EnvGuard env("XSEP_THREADS", "3");
    b = separate_image(m, y1, y2, dicts, small_config());
  }
  EXPECT_EQ(a.side1, b.side1);
  EXPECT_EQ(a.side2, b.side2);
  EXPECT_EQ(a.innovation, b.innovation);
}

TEST(Mca, OrthogonalSubspacesSplitExactly) {
  std::mt19937_64 rng(15);
  const Mat q = testing::random_orthonormal(16, rng);
  const Mat l1 = q.leftCols(8), l2 = q.rightCols(8);
  const McaOperator op = mca_operator(l1, l2, 3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec a = l1 * random_sparse_code(8, 0, 8, 2, rng).to_dense();
    const Vec b = l2 * random_sparse_code(8, 0, 8, 2, rng).to_dense();
    const McaPatch r = mca_patch(op, a + b);
    EXPECT_LE((r.side1 - a).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((r.side2 - b).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Mca, SwappedDictionariesSwapOutputs) {
  std::mt19937_64 rng(16);
  const Mat l1 = unit_columns(16, 20, rng), l2 = unit_columns(16, 20, rng);
  const Vec m = testing::gaussian_vector(16, rng);
  const McaPatch a = mca_patch(mca_operator(l1, l2, 3, 4), m);
  const McaPatch b = mca_patch(mca_operator(l2, l1, 4, 3), m);
  EXPECT_EQ(a.side1, b.side2);
  EXPECT_EQ(a.side2, b.side1);
}

TEST(Mca, IdenticalDictionariesDeterministic) {
  std::mt19937_64 rng(17);
  const Mat l = unit_columns(16, 20, rng);
  const std::vector<Mat> lam{l};
  const Image m = random_image(24, 24, rng);
  const auto a = mca_separate(m, lam, lam, 3, 3, small_config());
  const auto b = mca_separate(m, lam, lam, 3, 3, small_config());
  EXPECT_EQ(a.side1, b.side1);
  EXPECT_EQ(a.side2, b.side2);
}

TEST(Mca, ZeroBudgetsGiveLowpassShares) {
  std::mt19937_64 rng(18);
  const std::vector<Mat> lam{unit_columns(16, 20, rng)};
  const Image m = random_image(26, 26, rng);
  const auto r = mca_separate(m, lam, lam, 0, 0, small_config());
  EXPECT_EQ(r.side1, r.side2);
  Pyramid p = build_pyramid(m, small_config().scales);
  for (auto& lvl : p.levels) lvl.texture.patches.setZero();
  EXPECT_LE((r.side1 + r.side2).max_abs_diff(collapse_pyramid(p)), 1e-12);
}

TEST(Mca, BudgetsRespected) {
  std::mt19937_64 rng(19);
  const std::vector<Mat> l1{unit_columns(16, 20, rng)}, l2{unit_columns(16, 20, rng)};
  const auto r = mca_separate(random_image(24, 24, rng), l1, l2, 3, 2, small_config());
  EXPECT_TRUE(r.stats.budgets_respected);
  EXPECT_LE(r.stats.max_block_support[0], 3u);
  EXPECT_LE(r.stats.max_block_support[1], 2u);
}

}  // namespace
}  // namespace xsep
