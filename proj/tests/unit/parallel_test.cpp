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

#include <atomic>
#include <stdexcept>
#include <vector>

#include "test_support.hpp"
#include "xsep/parallel.hpp"

namespace xsep {
namespace {

TEST(ParallelFor, VisitsEachIndexOnce) {
  for (std::size_t threads : {1u, 2u, 3u, 8u, 100u}) {
    std::vector<std::atomic<int>> hits(37);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, threads);
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, [](std::size_t) { FAIL(); }, 4);
}

TEST(ParallelFor, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(
                   10, [](std::size_t i) { if (i == 7) throw std::runtime_error("boom"); }, 3),
               std::runtime_error);
}

TEST(ParallelFor, ThreadCountFromEnvironment) {
  {
    testing::EnvGuard g("XSEP_THREADS", "3");
    EXPECT_EQ(configured_threads(), 3u);
  }
  testing::EnvGuard g("XSEP_THREADS", "zero");
  EXPECT_GE(configured_threads(), 1u);
}

}  // namespace
}  // namespace xsep
