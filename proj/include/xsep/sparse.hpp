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

// Greedy sparse coding over a dictionary whose atoms are split into blocks,
// each with its own sparsity budget. Plain OMP is the single-block case.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "xsep/numerics.hpp"

namespace xsep {

/// Sparse vector: strictly increasing indices below `dim`, no stored zeros.
struct SparseCode {
  struct Entry {
    std::size_t index = 0;
    double value = 0.0;
    bool operator==(const Entry&) const = default;
  };

  std::size_t dim = 0;
  std::vector<Entry> entries;

  std::size_t nnz() const { return entries.size(); }

  Vec to_dense() const {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
    for (const auto& e : entries) v(static_cast<Eigen::Index>(e.index)) = e.value;
    return v;
  }

  /// Entries with index in [first, first + count), re-indexed from 0.
  SparseCode slice(std::size_t first, std::size_t count) const {
    SparseCode out;
    out.dim = count;
    for (const auto& e : entries)
      if (e.index >= first && e.index < first + count)
        out.entries.push_back({e.index - first, e.value});
    return out;
  }

  bool operator==(const SparseCode&) const = default;
};

/// Disjoint atom blocks covering [0, dim), each with a sparsity budget.
class BudgetPartition {
 public:
  struct Block {
    std::vector<std::size_t> indices;
    std::size_t budget = 0;
  };

  BudgetPartition() = default;

  BudgetPartition(std::vector<Block> blocks, std::size_t dim)
      : blocks_(std::move(blocks)), block_of_(dim, kNone) {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      require(blk.budget <= blk.indices.size(),
              "BudgetPartition: block " + std::to_string(b) + " budget " +
                  std::to_string(blk.budget) + " exceeds its " +
                  std::to_string(blk.indices.size()) + " atoms");
      for (std::size_t idx : blk.indices) {
        require(idx < dim, "BudgetPartition: index " + std::to_string(idx) + " out of range");
        require(block_of_[idx] == kNone,
                "BudgetPartition: index " + std::to_string(idx) + " in two blocks");
        block_of_[idx] = b;
      }
    }
    for (std::size_t i = 0; i < dim; ++i)
      require(block_of_[i] != kNone,
              "BudgetPartition: index " + std::to_string(i) + " belongs to no block");
  }

  /// Consecutive blocks of the given (size, budget) pairs.
  static BudgetPartition contiguous(const std::vector<std::pair<std::size_t, std::size_t>>& sizes) {
    std::vector<Block> blocks;
    std::size_t next = 0;
    for (const auto& [size, budget] : sizes) {
      Block b;
      b.budget = budget;
      for (std::size_t i = 0; i < size; ++i) b.indices.push_back(next++);
      blocks.push_back(std::move(b));
    }
    return BudgetPartition(std::move(blocks), next);
  }

  std::size_t dim() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_[b]; }
  std::size_t block_of(std::size_t index) const { return block_of_[index]; }
  std::size_t budget(std::size_t b) const { return blocks_[b].budget; }

  std::size_t total_budget() const {
    std::size_t s = 0;
    for (const auto& b : blocks_) s += b.budget;
    return s;
  }

  /// Number of code entries falling in each block.
  std::vector<std::size_t> support_counts(const SparseCode& code) const {
    std::vector<std::size_t> counts(blocks_.size(), 0);
    for (const auto& e : code.entries) ++counts[block_of_[e.index]];
    return counts;
  }

  bool complies(const SparseCode& code) const {
    const auto counts = support_counts(code);
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      if (counts[b] > blocks_[b].budget) return false;
    return true;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Process-wide tally of finished pursuits and of budget checks that failed.
struct PursuitAudit {
  std::atomic<std::uint64_t> pursuits{0};
  std::atomic<std::uint64_t> violations{0};
};

inline PursuitAudit& pursuit_audit() {
  static PursuitAudit audit;
  return audit;
}

struct PursuitOptions {
  // Stop once ||r|| <= residual_tol * ||b||.
  double residual_tol = 1e-12;
};

struct PursuitResult {
  SparseCode code;
  Vec residual;
  std::vector<std::size_t> selection_order;
  std::vector<double> residual_norms;  // ||r_0||, ||r_1||, ...
};

/// Next admissible atom given precomputed correlations <r, theta_k>: the
/// largest |correlation| among atoms not yet selected whose block still has
/// budget; ties go to the lower index. Walking a stable descending sort and
/// taking the first admissible entry gives the same answer.
inline std::size_t select_admissible(const Vec& correlations, const BudgetPartition& partition,
                                     const std::vector<char>& in_support,
                                     std::span<const std::size_t> counts) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  double best_abs = -1.0;
  for (Eigen::Index k = 0; k < correlations.size(); ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (in_support[idx]) continue;
    const std::size_t blk = partition.block_of(idx);
    if (counts[blk] >= partition.budget(blk)) continue;
    const double a = std::abs(correlations(k));
    if (a > best_abs) {
      best_abs = a;
      best = idx;
    }
  }
  if (best == std::numeric_limits<std::size_t>::max())
    throw std::logic_error("budgeted pursuit: no admissible atom left");
  return best;
}

/// One greedy selection step of the budgeted pursuit from explicit loop state.
inline std::size_t greedy_step(const Mat& theta, const Vec& residual,
                               const BudgetPartition& partition,
                               std::span<const std::size_t> support,
                               std::span<const std::size_t> counts) {
  require(theta.rows() == residual.size(), "greedy_step: residual length mismatch");
  require(static_cast<std::size_t>(theta.cols()) == partition.dim(),
          "greedy_step: partition does not cover the dictionary");
  require(counts.size() == partition.block_count(), "greedy_step: one count per block");
  std::vector<char> in_support(partition.dim(), 0);
  for (std::size_t k : support) in_support.at(k) = 1;
  const Vec corr = theta.transpose() * residual;
  return select_admissible(corr, partition, in_support, counts);
}

/// Budget-partitioned OMP: total_budget() greedy iterations, each admitting the
/// best-correlated atom whose block still has budget, followed by a least
/// squares refit on the whole support.
inline PursuitResult budgeted_omp(const Mat& theta, const Vec& b,
                                  const BudgetPartition& partition,
                                  const PursuitOptions& opts = {}) {
  require(theta.rows() == b.size(), "budgeted_omp: signal length " + std::to_string(b.size()) +
                                        " does not match dictionary rows " +
                                        std::to_string(theta.rows()));
  require(static_cast<std::size_t>(theta.cols()) == partition.dim(),
          "budgeted_omp: partition covers " + std::to_string(partition.dim()) +
              " atoms, dictionary has " + std::to_string(theta.cols()));
  const std::size_t iterations = partition.total_budget();
  require(iterations <= static_cast<std::size_t>(theta.rows()),
          "budgeted_omp: total budget " + std::to_string(iterations) + " exceeds signal length " +
              std::to_string(theta.rows()));

  PursuitResult res;
  res.code.dim = partition.dim();
  res.residual = b;
  const double stop = opts.residual_tol * b.norm();
  res.residual_norms.push_back(b.norm());

  std::vector<char> in_support(partition.dim(), 0);
  std::vector<std::size_t> counts(partition.block_count(), 0);
  Mat chosen(theta.rows(), 0);
  Vec coef;

  for (std::size_t it = 0; it < iterations; ++it) {
    if (res.residual_norms.back() <= stop) break;
    const Vec corr = theta.transpose() * res.residual;
    const std::size_t k = select_admissible(corr, partition, in_support, counts);
    in_support[k] = 1;
    ++counts[partition.block_of(k)];
    res.selection_order.push_back(k);
    chosen.conservativeResize(Eigen::NoChange, chosen.cols() + 1);
    chosen.col(chosen.cols() - 1) = theta.col(static_cast<Eigen::Index>(k));
    coef = least_squares(chosen, b);
    res.residual = b - chosen * coef;
    res.residual_norms.push_back(res.residual.norm());
  }

  std::vector<std::pair<std::size_t, double>> pairs;
  for (std::size_t i = 0; i < res.selection_order.size(); ++i)
    if (coef(static_cast<Eigen::Index>(i)) != 0.0)
      pairs.emplace_back(res.selection_order[i], coef(static_cast<Eigen::Index>(i)));
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [idx, val] : pairs) res.code.entries.push_back({idx, val});

  auto& audit = pursuit_audit();
  audit.pursuits.fetch_add(1, std::memory_order_relaxed);
  if (!partition.complies(res.code)) {
    audit.violations.fetch_add(1, std::memory_order_relaxed);
    throw std::logic_error("budgeted_omp: block budget exceeded");
  }
  return res;
}

/// Plain OMP with sparsity s: the single-block budgeted pursuit.
inline PursuitResult omp(const Mat& theta, const Vec& b, std::size_t s,
                         const PursuitOptions& opts = {}) {
  const auto d = static_cast<std::size_t>(theta.cols());
  require(s <= d, "omp: sparsity " + std::to_string(s) + " exceeds atom count " +
                      std::to_string(d));
  return budgeted_omp(theta, b, BudgetPartition::contiguous({{d, s}}), opts);
}

}  // namespace xsep
