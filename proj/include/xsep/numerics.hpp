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

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace xsep {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the caller breaks a documented precondition (shapes, ranges).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

inline void require_finite(const Mat& m, const std::string& what) {
  if (!m.allFinite()) throw ContractViolation(what + ": non-finite entry");
}

/// Minimizer of ||A x - b||_2. Rank-deficient systems get the minimum-norm
/// minimizer (complete orthogonal decomposition with column pivoting).
inline Vec least_squares(const Mat& a, const Vec& b) {
  require(a.rows() >= 1 && a.cols() >= 1, "least_squares: empty system");
  require(a.rows() == b.size(),
          "least_squares: A has " + std::to_string(a.rows()) + " rows but b has " +
              std::to_string(b.size()) + " entries");
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(a);
  return cod.solve(b);
}

/// Scales every column to unit l2 norm; returns the original norms.
inline std::pair<Mat, Vec> normalize_columns(const Mat& m) {
  Mat out = m;
  Vec scales(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw ContractViolation("normalize_columns: column " + std::to_string(j) +
                              " has zero or non-finite norm");
    out.col(j) /= norm;
    scales(j) = norm;
  }
  return {std::move(out), std::move(scales)};
}

namespace detail {

inline std::size_t exact_sqrt(std::size_t v, const char* what) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(v))));
  if (r * r != v)
    throw ContractViolation(std::string("odct_dictionary: ") + what + " = " +
                            std::to_string(v) + " is not a perfect square");
  return r;
}

// 1-D overcomplete DCT frame: pixels x frequencies, non-DC atoms mean-removed,
// unit columns.
inline Mat odct_frame(std::size_t pixels, std::size_t freqs) {
  Mat f(pixels, freqs);
  const double pi = std::acos(-1.0);
  for (std::size_t j = 0; j < freqs; ++j) {
    for (std::size_t i = 0; i < pixels; ++i)
      f(i, j) = std::cos(pi * static_cast<double>(j) * static_cast<double>(2 * i + 1) /
                         (2.0 * static_cast<double>(freqs)));
    if (j > 0) f.col(j).array() -= f.col(j).mean();
    f.col(j).normalize();
  }
  return f;
}

}  // namespace detail

/// 2-D overcomplete DCT dictionary for sqrt(n) x sqrt(n) patches with d atoms.
/// Atom (j1, j2) sits in column j1 * sqrt(d) + j2; pixels are row-major.
inline Mat odct_dictionary(std::size_t n, std::size_t d) {
  const std::size_t p = detail::exact_sqrt(n, "n");
  const std::size_t q = detail::exact_sqrt(d, "d");
  require(n >= 1, "odct_dictionary: n must be positive");
  require(d >= n, "odct_dictionary: atom count d must be >= patch dimension n");
  const Mat frame = detail::odct_frame(p, q);
  Mat dict(n, d);
  for (std::size_t j1 = 0; j1 < q; ++j1)
    for (std::size_t j2 = 0; j2 < q; ++j2)
      for (std::size_t i1 = 0; i1 < p; ++i1)
        for (std::size_t i2 = 0; i2 < p; ++i2)
          dict(static_cast<Eigen::Index>(i1 * p + i2), static_cast<Eigen::Index>(j1 * q + j2)) =
              frame(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(j1)) *
              frame(static_cast<Eigen::Index>(i2), static_cast<Eigen::Index>(j2));
  // Kronecker products of unit vectors are unit; renormalize to wash out rounding.
  for (Eigen::Index j = 0; j < dict.cols(); ++j) dict.col(j).normalize();
  return dict;
}

}  // namespace xsep
