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

#ifndef PSLABEL_STATS_H_
#define PSLABEL_STATS_H_

#include <optional>
#include <span>
#include <vector>

namespace pslabel {

// Ranks starting at 1; tied values share their average rank.
std::vector<double> AverageRanks(std::span<const double> values);

// Pearson correlation, or nullopt when either side has zero variance or the
// inputs hold fewer than 2 pairs.
std::optional<double> Pearson(std::span<const double> x,
                              std::span<const double> y);

// Pearson correlation of average ranks.
std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept; nullopt when x has zero
// variance.
std::optional<LineFit> FitLine(std::span<const double> x,
                               std::span<const double> y);

}  // namespace pslabel

#endif  // PSLABEL_STATS_H_
