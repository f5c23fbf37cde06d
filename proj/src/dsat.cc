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

#include "pslabel/dsat.h"

#include "pslabel/error.h"

namespace pslabel {

ThresholdChoice SelectThreshold(const F1Curve& curve) {
  if (curve.points.empty()) {
    throw InvalidArgumentError("cannot select a threshold from an empty curve");
  }
  ThresholdChoice best{curve.points.front().threshold,
                       curve.points.front().f1};
  for (const PRPoint& p : curve.points) {
    // Thresholds ascend, so >= hands ties to the later (higher) one.
    if (p.f1 >= best.peak_f1) best = {p.threshold, p.f1};
  }
  return best;
}

DsatState MaybeUpdate(const DsatState& state, std::int64_t iteration,
                      std::span<const Detection> dets,
                      std::span<const GroundTruth> gts) {
  if (iteration < 0) throw InvalidArgumentError("iteration must be >= 0");
  if (state.update_period_iters <= 0) {
    throw InvalidArgumentError("update period must be positive");
  }
  if (state.frozen || iteration == 0 ||
      iteration % state.update_period_iters != 0) {
    return state;
  }
  if (!state.history.empty() && iteration <= state.history.back().iteration) {
    return state;
  }
  const F1Curve curve =
      PrCurve(dets, gts, state.grid, state.match_iou, state.inclusion);
  const ThresholdChoice choice = SelectThreshold(curve);
  DsatState next = state;
  next.sigma_cls = choice.threshold;
  next.history.push_back({iteration, choice.threshold, choice.peak_f1});
  return next;
}

DsatState FixedThresholdBaseline(double sigma) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) {
    throw InvalidArgumentError("fixed threshold must lie in [0, 1]");
  }
  DsatState state;
  state.sigma_cls = sigma;
  state.frozen = true;
  return state;
}

}  // namespace pslabel
