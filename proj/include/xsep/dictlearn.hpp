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

// Coupled dictionary learning for co-located visual/X-ray texture patches.
//
// Model, per training column:
//   y = psi_c * z
//   x = phi_c * z + phi * v
// with ||z||_0 <= s_z and ||v||_0 <= s_v. Training alternates a budgeted
// pursuit on the stacked system [y; x] = [[psi_c, 0], [phi_c, phi]] [z; v]
// with closed-form least-squares updates of psi_c and [phi_c phi].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "xsep/image.hpp"
#include "xsep/numerics.hpp"
#include "xsep/parallel.hpp"
#include "xsep/patching.hpp"
#include "xsep/sparse.hpp"

namespace xsep {

struct CoupledDictionaryTriple {
  Mat psi_c;  // n x gamma, visual common
  Mat phi_c;  // n x gamma, X-ray common
  Mat phi;    // n x d, X-ray innovation
  std::size_t scale = 1;

  std::size_t patch_dim() const { return static_cast<std::size_t>(psi_c.rows()); }
  std::size_t common_atoms() const { return static_cast<std::size_t>(psi_c.cols()); }
  std::size_t innovation_atoms() const { return static_cast<std::size_t>(phi.cols()); }

  /// [phi_c phi], the full X-ray dictionary.
  Mat xray_dictionary() const {
    Mat out(phi_c.rows(), phi_c.cols() + phi.cols());
    out << phi_c, phi;
    return out;
  }

  void validate(double norm_tol = 1e-10) const {
    require(psi_c.rows() > 0 && psi_c.cols() > 0 && phi.cols() > 0,
            "CoupledDictionaryTriple: empty dictionary");
    require(phi_c.rows() == psi_c.rows() && phi.rows() == psi_c.rows(),
            "CoupledDictionaryTriple: dictionaries disagree on patch dimension");
    require(phi_c.cols() == psi_c.cols(),
            "CoupledDictionaryTriple: psi_c and phi_c disagree on common atom count");
    for (const Mat* m : {&psi_c, &phi_c, &phi}) {
      require_finite(*m, "CoupledDictionaryTriple");
      for (Eigen::Index j = 0; j < m->cols(); ++j)
        require(std::abs(m->col(j).norm() - 1.0) <= norm_tol,
                "CoupledDictionaryTriple: column " + std::to_string(j) + " is not unit-norm");
    }
  }
};

/// Co-located DC-free texture patches, one per column.
struct TrainingSet {
  Mat x;  // X-ray
  Mat y;  // visual

  std::size_t size() const { return static_cast<std::size_t>(x.cols()); }
};

struct LearnConfig {
  std::size_t s_z = 10;
  std::size_t s_v = 8;
  std::size_t iterations = 50;
  double objective_tol = 1e-4;  // relative change of the coding objective; <= 0 disables
  std::uint64_t seed = 1;       // patch sampling
};

/// Overcomplete-DCT start for any atom count: the 2-D ODCT with the smallest
/// square frequency grid holding `atoms` atoms (at least the orthonormal DCT),
/// keeping the lowest-frequency atoms (by j1 + j2, then column order).
inline Mat initial_dictionary(std::size_t n, std::size_t atoms) {
  const std::size_t p = detail::exact_sqrt(n, "n");
  std::size_t q = p;
  while (q * q < atoms) ++q;
  const Mat full = odct_dictionary(n, q * q);
  if (q * q == atoms) return full;
  std::vector<std::size_t> order(q * q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [q](std::size_t a, std::size_t b) {
    return a / q + a % q < b / q + b % q;
  });
  Mat out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(atoms));
  for (std::size_t k = 0; k < atoms; ++k)
    out.col(static_cast<Eigen::Index>(k)) = full.col(static_cast<Eigen::Index>(order[k]));
  return out;
}

inline CoupledDictionaryTriple initial_triple(std::size_t n, std::size_t gamma, std::size_t d) {
  CoupledDictionaryTriple t;
  t.psi_c = initial_dictionary(n, gamma);
  t.phi_c = t.psi_c;
  t.phi = initial_dictionary(n, d);
  return t;
}

struct CoupledCodes {
  Mat z;  // gamma x t
  Mat v;  // d x t
};

/// Stacked coupled-coding operator, columns normalized for the pursuit.
struct CoupledSystem {
  Mat theta;  // 2n x (gamma + d)
  Vec scales;
  BudgetPartition partition;
};

inline CoupledSystem coupled_system(const CoupledDictionaryTriple& dicts, std::size_t s_z,
                                    std::size_t s_v) {
  const auto n = static_cast<Eigen::Index>(dicts.patch_dim());
  const auto g = static_cast<Eigen::Index>(dicts.common_atoms());
  const auto d = static_cast<Eigen::Index>(dicts.innovation_atoms());
  require(dicts.phi_c.rows() == n && dicts.phi.rows() == n && dicts.phi_c.cols() == g,
          "coupled_system: inconsistent dictionary shapes");
  Mat stacked = Mat::Zero(2 * n, g + d);
  stacked.topLeftCorner(n, g) = dicts.psi_c;
  stacked.bottomLeftCorner(n, g) = dicts.phi_c;
  stacked.bottomRightCorner(n, d) = dicts.phi;
  CoupledSystem sys;
  std::tie(sys.theta, sys.scales) = normalize_columns(stacked);
  sys.partition = BudgetPartition::contiguous(
      {{static_cast<std::size_t>(g), s_z}, {static_cast<std::size_t>(d), s_v}});
  return sys;
}

/// Per-column budgeted pursuit on [y; x]; codes refer to the unnormalized
/// stacked columns.
inline CoupledCodes coupled_sparse_coding(const TrainingSet& train,
                                          const CoupledDictionaryTriple& dicts,
                                          const LearnConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(dicts.patch_dim());
  require(train.x.rows() == n && train.y.rows() == n,
          "coupled_sparse_coding: training patches have dimension " +
              std::to_string(train.x.rows()) + ", dictionaries " + std::to_string(n));
  require(train.x.cols() == train.y.cols(),
          "coupled_sparse_coding: X and Y have different column counts");
  const CoupledSystem sys = coupled_system(dicts, cfg.s_z, cfg.s_v);
  const auto g = static_cast<Eigen::Index>(dicts.common_atoms());
  const auto t = train.x.cols();

  CoupledCodes codes{Mat::Zero(g, t), Mat::Zero(static_cast<Eigen::Index>(dicts.innovation_atoms()), t)};
  parallel_for(static_cast<std::size_t>(t), [&](std::size_t i) {
    const auto tau = static_cast<Eigen::Index>(i);
    Vec b(2 * n);
    b << train.y.col(tau), train.x.col(tau);
    const PursuitResult res = budgeted_omp(sys.theta, b, sys.partition);
    for (const auto& e : res.code.entries) {
      const auto k = static_cast<Eigen::Index>(e.index);
      const double w = e.value / sys.scales(k);
      if (k < g)
        codes.z(k, tau) = w;
      else
        codes.v(k - g, tau) = w;
    }
  });
  return codes;
}

/// 0.5 ||Y - psi_c Z||_F^2 + 0.5 ||X - phi_c Z - phi V||_F^2
inline double coupled_objective(const TrainingSet& train, const Mat& psi_c, const Mat& phi_c,
                                const Mat& phi, const CoupledCodes& codes) {
  const double ey = (train.y - psi_c * codes.z).squaredNorm();
  const double ex = (train.x - phi_c * codes.z - phi * codes.v).squaredNorm();
  return 0.5 * (ey + ex);
}

inline double coupled_objective(const TrainingSet& train, const CoupledDictionaryTriple& dicts,
                                const CoupledCodes& codes) {
  return coupled_objective(train, dicts.psi_c, dicts.phi_c, dicts.phi, codes);
}

/// Result of a closed-form dictionary update. The raw minimizer equals
/// atoms * diag(scales). Atoms whose code row is zero (or whose solution is
/// zero) are dead: zero column, zero scale.
struct DictionaryUpdate {
  Mat atoms;
  Vec scales;
  std::vector<char> dead;

  Mat raw() const { return atoms * scales.asDiagonal(); }
  std::size_t dead_count() const {
    return static_cast<std::size_t>(std::count(dead.begin(), dead.end(), 1));
  }
};

namespace detail {

// target * codes^T (codes codes^T + lambda I)^-1, lambda = 1e-10 trace / rows.
inline DictionaryUpdate ridge_update(const Mat& target, const Mat& codes, const char* who) {
  require(target.cols() == codes.cols(), std::string(who) + ": signal and code counts differ");
  const Mat gram = codes * codes.transpose();
  const double tr = gram.trace();
  if (!(tr > 0.0)) throw ContractViolation(std::string(who) + ": all codes are zero");
  const double lambda = 1e-10 * tr / static_cast<double>(codes.rows());
  Mat reg = gram;
  reg.diagonal().array() += lambda;
  const Mat rhs = target * codes.transpose();
  Eigen::LLT<Mat> llt(reg);
  if (llt.info() != Eigen::Success)
    throw Error(std::string(who) + ": regularized Gram matrix is not positive definite");
  const Mat raw = llt.solve(rhs.transpose()).transpose();

  DictionaryUpdate up;
  up.atoms = Mat::Zero(raw.rows(), raw.cols());
  up.scales = Vec::Zero(raw.cols());
  up.dead.assign(static_cast<std::size_t>(raw.cols()), 0);
  for (Eigen::Index k = 0; k < raw.cols(); ++k) {
    const double norm = raw.col(k).norm();
    const bool unused = codes.row(k).squaredNorm() == 0.0;
    if (unused || !(norm > 0.0) || !std::isfinite(norm)) {
      up.dead[static_cast<std::size_t>(k)] = 1;
      continue;
    }
    up.atoms.col(k) = raw.col(k) / norm;
    up.scales(k) = norm;
  }
  return up;
}

}  // namespace detail

/// Closed-form minimizer of ||Y - psi_c Z||_F (ridge-regularized).
inline DictionaryUpdate update_psi(const Mat& y, const Mat& z) {
  return detail::ridge_update(y, z, "update_psi");
}

/// Closed-form minimizer of ||X - [phi_c phi] [Z; V]||_F (ridge-regularized);
/// the first z.rows() atoms are phi_c.
inline DictionaryUpdate update_phi(const Mat& x, const Mat& z, const Mat& v) {
  require(z.cols() == v.cols(), "update_phi: Z and V have different column counts");
  Mat stacked(z.rows() + v.rows(), z.cols());
  stacked << z, v;
  return detail::ridge_update(x, stacked, "update_phi");
}

struct TrainTraceEntry {
  std::size_t iteration = 0;
  double after_coding = 0.0;
  double after_psi_update = 0.0;
  double after_phi_update = 0.0;
  double after_normalization = 0.0;
  std::size_t max_common_support = 0;
  std::size_t max_innovation_support = 0;
  std::size_t replaced_atoms = 0;
};

struct TrainResult {
  CoupledDictionaryTriple dicts;
  std::vector<TrainTraceEntry> trace;
  CoupledCodes codes;  // from the last coding step
};

namespace detail {

inline std::size_t max_column_support(const Mat& m) {
  std::size_t best = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    best = std::max(best, static_cast<std::size_t>((m.col(j).array() != 0.0).count()));
  return best;
}

// Replaces dead atoms by the worst-reconstructed training columns.
inline std::size_t replace_dead_atoms(const TrainingSet& train, CoupledDictionaryTriple& dicts,
                                      const CoupledCodes& codes,
                                      const std::vector<char>& dead_common,
                                      const std::vector<char>& dead_innovation) {
  const bool any = std::count(dead_common.begin(), dead_common.end(), 1) +
                       std::count(dead_innovation.begin(), dead_innovation.end(), 1) >
                   0;
  if (!any) return 0;
  const Mat ey = train.y - dicts.psi_c * codes.z;
  const Mat ex = train.x - dicts.phi_c * codes.z - dicts.phi * codes.v;
  const Vec err = ey.colwise().squaredNorm().transpose() + ex.colwise().squaredNorm().transpose();
  std::vector<std::size_t> order(static_cast<std::size_t>(err.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return err(static_cast<Eigen::Index>(a)) > err(static_cast<Eigen::Index>(b));
  });

  std::size_t cursor = 0;
  std::size_t replaced = 0;
  auto next_column = [&](bool need_visual) -> std::ptrdiff_t {
    while (cursor < order.size()) {
      const auto tau = static_cast<Eigen::Index>(order[cursor++]);
      if (train.x.col(tau).norm() > 0.0 && (!need_visual || train.y.col(tau).norm() > 0.0))
        return tau;
    }
    return -1;
  };
  for (std::size_t k = 0; k < dead_common.size(); ++k) {
    if (!dead_common[k]) continue;
    const auto tau = next_column(true);
    if (tau < 0) break;
    dicts.psi_c.col(static_cast<Eigen::Index>(k)) = train.y.col(tau).normalized();
    dicts.phi_c.col(static_cast<Eigen::Index>(k)) = train.x.col(tau).normalized();
    ++replaced;
  }
  for (std::size_t k = 0; k < dead_innovation.size(); ++k) {
    if (!dead_innovation[k]) continue;
    const auto tau = next_column(false);
    if (tau < 0) break;
    dicts.phi.col(static_cast<Eigen::Index>(k)) = train.x.col(tau).normalized();
    ++replaced;
  }
  return replaced;
}

}  // namespace detail

/// Alternating coupled dictionary learning from `init`.
inline TrainResult train(const TrainingSet& train_set, CoupledDictionaryTriple init,
                         const LearnConfig& cfg) {
  require(train_set.x.rows() == train_set.y.rows() && train_set.x.cols() == train_set.y.cols(),
          "train: X and Y must have identical dimensions");
  require(train_set.size() >= 1, "train: empty training set");
  init.validate();
  require(cfg.s_z <= init.common_atoms() && cfg.s_v <= init.innovation_atoms() &&
              cfg.s_z + cfg.s_v <= 2 * init.patch_dim(),
          "train: sparsity budgets incompatible with dictionary sizes");

  TrainResult out;
  out.dicts = std::move(init);
  auto& dicts = out.dicts;
  const auto g = static_cast<Eigen::Index>(dicts.common_atoms());
  double previous = -1.0;

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    CoupledCodes codes = coupled_sparse_coding(train_set, dicts, cfg);
    TrainTraceEntry e;
    e.iteration = it;
    e.after_coding = coupled_objective(train_set, dicts, codes);
    e.max_common_support = detail::max_column_support(codes.z);
    e.max_innovation_support = detail::max_column_support(codes.v);
    const bool converged =
        cfg.objective_tol > 0.0 && previous >= 0.0 &&
        std::abs(previous - e.after_coding) <= cfg.objective_tol * std::max(previous, 1e-300);
    previous = e.after_coding;
    if (converged) {
      e.after_psi_update = e.after_phi_update = e.after_normalization = e.after_coding;
      out.trace.push_back(e);
      out.codes = std::move(codes);
      break;
    }

    // psi_c: unit atoms, scales folded into Z rows and divided out of phi_c so
    // that both products are unchanged.
    const DictionaryUpdate up_psi = update_psi(train_set.y, codes.z);
    for (Eigen::Index k = 0; k < g; ++k) {
      if (up_psi.dead[static_cast<std::size_t>(k)]) continue;
      const double s = up_psi.scales(k);
      dicts.psi_c.col(k) = up_psi.atoms.col(k);
      codes.z.row(k) *= s;
      dicts.phi_c.col(k) /= s;
    }
    e.after_psi_update = coupled_objective(train_set, dicts, codes);

    const DictionaryUpdate up_phi = update_phi(train_set.x, codes.z, codes.v);
    const Mat raw = up_phi.raw();
    std::vector<char> dead_common(up_psi.dead);
    std::vector<char> dead_innovation(static_cast<std::size_t>(dicts.innovation_atoms()), 0);
    Mat phi_c_raw = dicts.phi_c;
    Mat phi_raw = dicts.phi;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (up_phi.dead[static_cast<std::size_t>(k)]) {
        if (k < g)
          dead_common[static_cast<std::size_t>(k)] = 1;
        else
          dead_innovation[static_cast<std::size_t>(k - g)] = 1;
        continue;
      }
      if (k < g)
        phi_c_raw.col(k) = raw.col(k);
      else
        phi_raw.col(k - g) = raw.col(k);
    }
    e.after_phi_update = coupled_objective(train_set, dicts.psi_c, phi_c_raw, phi_raw, codes);

    // Innovation scales fold exactly into V. Common X-ray atoms share Z with
    // psi_c, so their normalization is not compensated.
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      if (up_phi.dead[static_cast<std::size_t>(k)]) continue;
      if (k < g) {
        dicts.phi_c.col(k) = up_phi.atoms.col(k);
      } else {
        dicts.phi.col(k - g) = up_phi.atoms.col(k);
        codes.v.row(k - g) *= up_phi.scales(k);
      }
    }
    e.after_normalization = coupled_objective(train_set, dicts, codes);
    e.replaced_atoms =
        detail::replace_dead_atoms(train_set, dicts, codes, dead_common, dead_innovation);
    // Atoms that were neither updated nor replaced (e.g. a phi_c column whose
    // solution vanished after the psi fold) still leave unit-norm.
    for (Eigen::Index k = 0; k < g; ++k) {
      if (std::abs(dicts.psi_c.col(k).norm() - 1.0) > 1e-12) dicts.psi_c.col(k).normalize();
      if (std::abs(dicts.phi_c.col(k).norm() - 1.0) > 1e-12) dicts.phi_c.col(k).normalize();
    }
    out.trace.push_back(e);
    out.codes = std::move(codes);
  }
  return out;
}

/// Trains from the overcomplete-DCT initialization.
inline TrainResult train(const TrainingSet& train_set, std::size_t gamma, std::size_t d,
                         const LearnConfig& cfg) {
  const auto n = static_cast<std::size_t>(train_set.x.rows());
  return train(train_set, initial_triple(n, gamma, d), cfg);
}

struct SampledPatches {
  TrainingSet set;
  std::size_t available = 0;  // distinct co-located positions
  bool with_replacement = false;
};

/// Draws t co-located texture patch pairs at pyramid level `level` (1-based)
/// of every (visual, xray) pair. Without replacement when t fits the pool.
inline SampledPatches sample_training_patches(const std::vector<std::pair<Image, Image>>& pairs,
                                              std::size_t t,
                                              const std::vector<ScaleParams>& scales,
                                              std::size_t level, std::uint64_t seed) {
  require(!pairs.empty(), "sample_training_patches: no image pairs");
  require(level >= 1 && level <= scales.size(),
          "sample_training_patches: level " + std::to_string(level) + " outside 1.." +
              std::to_string(scales.size()));
  const std::vector<ScaleParams> prefix(scales.begin(),
                                        scales.begin() + static_cast<std::ptrdiff_t>(level));
  std::vector<PatchGrid> visual;
  std::vector<PatchGrid> xray;
  std::vector<std::size_t> offsets{0};
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& [vis, xr] = pairs[p];
    if (!vis.same_shape(xr))
      throw ContractViolation("sample_training_patches: pair " + std::to_string(p) +
                              " has visual " + shape_string(vis) + " but X-ray " +
                              shape_string(xr));
    visual.push_back(std::move(build_pyramid(vis, prefix).levels.back().texture));
    xray.push_back(std::move(build_pyramid(xr, prefix).levels.back().texture));
    offsets.push_back(offsets.back() + visual.back().count());
  }

  SampledPatches out;
  out.available = offsets.back();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picks;
  picks.reserve(t);
  if (t <= out.available) {
    std::vector<std::size_t> pool(out.available);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < t; ++i) {
      std::uniform_int_distribution<std::size_t> dist(i, out.available - 1);
      std::swap(pool[i], pool[dist(rng)]);
      picks.push_back(pool[i]);
    }
  } else {
    out.with_replacement = true;
    std::uniform_int_distribution<std::size_t> dist(0, out.available - 1);
    for (std::size_t i = 0; i < t; ++i) picks.push_back(dist(rng));
  }

  const auto n = static_cast<Eigen::Index>(prefix.back().patch_dim());
  out.set.x.resize(n, static_cast<Eigen::Index>(t));
  out.set.y.resize(n, static_cast<Eigen::Index>(t));
  for (std::size_t i = 0; i < t; ++i) {
    const std::size_t p =
        static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), picks[i]) -
                                 offsets.begin()) -
        1;
    const std::size_t local = picks[i] - offsets[p];
    out.set.x.col(static_cast<Eigen::Index>(i)) = xray[p].patch(local);
    out.set.y.col(static_cast<Eigen::Index>(i)) = visual[p].patch(local);
  }
  return out;
}

}  // namespace xsep
