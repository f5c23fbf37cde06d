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

#ifndef PSLABEL_DSAT_H_
#define PSLABEL_DSAT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pslabel/metrics.h"
#include "pslabel/nms.h"

namespace pslabel {

// Classification-score gate used before the first F1 evaluation, and the
// fixed-threshold baseline.
inline constexpr double kDefaultClassificationThreshold = 0.5;
inline constexpr std::int64_t kDefaultUpdatePeriodIters = 4000;

struct ThresholdChoice {
  double threshold = 0.0;
  double peak_f1 = 0.0;

  friend bool operator==(const ThresholdChoice&, const ThresholdChoice&) =
      default;
};

struct DsatHistoryEntry {
  std::int64_t iteration = 0;
  double threshold = 0.0;
  double peak_f1 = 0.0;

  friend bool operator==(const DsatHistoryEntry&, const DsatHistoryEntry&) =
      default;
};

// Dynamic self-adaptive threshold state. Values are replaced wholesale by
// MaybeUpdate; a single owner advances it.
struct DsatState {
  double sigma_cls = kDefaultClassificationThreshold;
  std::int64_t update_period_iters = kDefaultUpdatePeriodIters;
  ThresholdGrid grid;
  double match_iou = kDefaultMatchIou;
  ThresholdInclusion inclusion = ThresholdInclusion::kInclusive;
  // Set for fixed-threshold baselines; MaybeUpdate then never changes state.
  bool frozen = false;
  std::vector<DsatHistoryEntry> history;

  friend bool operator==(const DsatState&, const DsatState&) = default;
};

// Grid threshold with maximal F1, ties resolved toward the highest
// threshold. Throws InvalidArgumentError on an empty curve.
ThresholdChoice SelectThreshold(const F1Curve& curve);

// On positive multiples of the update period (and only once per iteration),
// recomputes the F1 curve of `dets` against `gts` and moves sigma_cls to its
// peak. Any other call returns `state` unchanged.
DsatState MaybeUpdate(const DsatState& state, std::int64_t iteration,
                      std::span<const Detection> dets,
                      std::span<const GroundTruth> gts);

// A state pinned at `sigma` forever.
DsatState FixedThresholdBaseline(
    double sigma = kDefaultClassificationThreshold);

}  // namespace pslabel

#endif  // PSLABEL_DSAT_H_
