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

// Independent reference implementations used as test oracles. They are
// written as plain loops and share no code with the library beyond the
// Eigen matrix types.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "xsep/image.hpp"
#include "xsep/numerics.hpp"

namespace xsep::oracle {

struct Omp2Result {
  std::vector<std::size_t> support;  // in selection order
  Vec coefficients;                  // aligned with support
};

// Straight-line transcription of the two-block budgeted greedy loop: sort
// |<r, theta_k>| descending (stable, so ties keep the lower index), walk the
// list and admit the first atom not yet chosen whose block (first `split`
// atoms vs the rest) still has budget, refit on the normal equations.
inline Omp2Result budgeted_omp_two_blocks(const Mat& theta, const Vec& b, std::size_t split,
                                          std::size_t s_first, std::size_t s_second) {
  const std::size_t D = static_cast<std::size_t>(theta.cols());
  Omp2Result out;
  Vec r = b;
  std::size_t used_first = 0, used_second = 0;
  std::vector<bool> chosen(D, false);
  for (std::size_t it = 0; it < s_first + s_second; ++it) {
    if (r.norm() <= 1e-12 * b.norm()) break;
    std::vector<double> c(D);
    for (std::size_t k = 0; k < D; ++k) {
      double dot = 0.0;
      for (Eigen::Index i = 0; i < theta.rows(); ++i) dot += r(i) * theta(i, k);
      c[k] = std::abs(dot);
    }
    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t bb) { return c[a] > c[bb]; });
    std::size_t pick = D;
    for (std::size_t k : order) {
      if (chosen[k]) continue;
      if (k < split && used_first < s_first) {
        ++used_first;
        pick = k;
        break;
      }
      if (k >= split && used_second < s_second) {
        ++used_second;
        pick = k;
        break;
      }
    }
    if (pick == D) break;
    chosen[pick] = true;
    out.support.push_back(pick);
    Mat a(theta.rows(), static_cast<Eigen::Index>(out.support.size()));
    for (std::size_t j = 0; j < out.support.size(); ++j)
      a.col(static_cast<Eigen::Index>(j)) = theta.col(static_cast<Eigen::Index>(out.support[j]));
    out.coefficients = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    r = b - a * out.coefficients;
  }
  return out;
}

// Mean SSIM evaluated window by window with the full 2-D Gaussian kernel.
inline double ssim(const Image& a, const Image& b, std::size_t side, double sigma, double k1,
                   double k2, double range) {
  std::vector<double> w(side * side);
  const double c = (static_cast<double>(side) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j) {
      const double di = static_cast<double>(i) - c, dj = static_cast<double>(j) - c;
      w[i * side + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      sum += w[i * side + j];
    }
  for (double& v : w) v /= sum;
  const double c1 = k1 * range * k1 * range, c2 = k2 * range * k2 * range;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r0 = 0; r0 + side <= a.height(); ++r0)
    for (std::size_t c0 = 0; c0 + side <= a.width(); ++c0) {
      double ma = 0, mb = 0;
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          ma += w[i * side + j] * a(r0 + i, c0 + j);
          mb += w[i * side + j] * b(r0 + i, c0 + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) {
          const double da = a(r0 + i, c0 + j) - ma, db = b(r0 + i, c0 + j) - mb;
          va += w[i * side + j] * da * da;
          vb += w[i * side + j] * db * db;
          cov += w[i * side + j] * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace xsep::oracle
