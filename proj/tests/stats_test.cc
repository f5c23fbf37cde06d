// Copyright 2026 The pslabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pslabel/stats.h"

#include <vector>

#include <gtest/gtest.h>

namespace pslabel {
namespace {

TEST(AverageRanks, Ties) {
  const std::vector<double> v = {3.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(AverageRanks(v), (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
}

TEST(Pearson, KnownValues) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {2, 4, 6, 8};
  const std::vector<double> z = {8, 6, 4, 2};
  EXPECT_NEAR(*Pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(*Pearson(x, z), -1.0, 1e-15);
  const std::vector<double> c = {1, 1, 1, 1};
  EXPECT_FALSE(Pearson(x, c).has_value());
  EXPECT_FALSE(Pearson(std::vector<double>{1}, std::vector<double>{2}));
}

TEST(Spearman, MonotoneNonlinear) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {1, 8, 27, 64, 125};
  EXPECT_NEAR(*Spearman(x, y), 1.0, 1e-15);
  // Hand value: ranks {1,2,3,4,5} vs {2,1,4,3,5}, sum d^2 = 4,
  // rho = 1 - 6*4/(5*24) = 0.8.
  const std::vector<double> w = {2, 1, 4, 3, 5};
  EXPECT_NEAR(*Spearman(x, w), 0.8, 1e-15);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x = {0, 1, 2, 3};
  const std::vector<double> y = {1, -1, -3, -5};
  const auto fit = FitLine(x, y);
  ASSERT_TRUE(fit.has_value());
  EXPECT_NEAR(fit->slope, -2.0, 1e-15);
  EXPECT_NEAR(fit->intercept, 1.0, 1e-15);
  EXPECT_FALSE(FitLine(std::vector<double>{1, 1}, std::vector<double>{0, 1}));
}

}  // namespace
}  // namespace pslabel
