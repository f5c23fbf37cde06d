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

#ifndef PSLABEL_NMS_H_
#define PSLABEL_NMS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pslabel/geometry.h"

namespace pslabel {

inline constexpr double kDefaultNmsIouThreshold = 0.6;
// Pre-filter score threshold used when harvesting pseudo labels.
inline constexpr double kDefaultPseudoLabelScoreThreshold = 0.4;
// Pre-filter score threshold used for plain inference NMS.
inline constexpr double kDefaultInferenceScoreThreshold = 0.05;

// One dense prediction. `score` is the final confidence used for ranking and
// filtering; `centerness` is kept as read and is not re-applied.
struct Detection {
  BBox bbox;
  double score = 0.0;
  std::optional<double> centerness;
  std::int64_t class_id = 0;
  std::int64_t image_id = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// A kept box together with the dispersion of the redundant boxes it
// suppressed.
struct PseudoLabel {
  BBox bbox;
  double score = 0.0;
  double uncertainty = 0.0;
  int cluster_size = 0;
  std::int64_t class_id = 0;
  std::int64_t image_id = 0;

  friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

struct ClusterStats {
  // Population standard deviation of x1, y1, x2, y2 over the members.
  std::array<double, 4> std_dev{};
  double mean_width = 0.0;
  double mean_height = 0.0;
  int count = 0;
};

// How the four coordinate deviations are paired with the mean width/height.
enum class UncertaintyIndexing {
  // std[2i + j]: x1/w, y1/h, x2/w, y2/h.
  kCornerAxis,
  // std[i + j] read literally: x1/w, y1/h, y1/w, x2/h. Comparison only.
  kLiteralSum,
};

struct NmsParams {
  double iou_threshold = kDefaultNmsIouThreshold;
  double score_threshold = kDefaultPseudoLabelScoreThreshold;
  UncertaintyIndexing indexing = UncertaintyIndexing::kCornerAxis;
};

// Tally of clusters that did not produce a pseudo label.
struct NmsDiagnostics {
  int clusters = 0;
  int singleton_drops = 0;
  int degenerate_drops = 0;
};

// Throws InvalidArgumentError for fewer than 2 boxes.
ClusterStats ComputeClusterStats(std::span<const BBox> cluster);

// Mean of the four coordinate deviations, x normalized by the mean width and
// y by the mean height. Throws InvalidArgumentError for fewer than 2 boxes and
// DegenerateClusterError when the mean width or height is zero.
double ClusterUncertainty(
    std::span<const BBox> cluster,
    UncertaintyIndexing indexing = UncertaintyIndexing::kCornerAxis);

// Strict weak order used everywhere detections are ranked: score descending,
// then x1, y1, x2, y2 ascending. Callers append their own index tie-break.
bool RanksBefore(const Detection& a, const Detection& b);

// Greedy per-(image, class) suppression. Boxes scoring below
// `params.score_threshold` are dropped first; a box is suppressed when its IoU
// with an earlier kept box is >= `params.iou_threshold`. Output is sorted by
// RanksBefore, then image, class and input index.
std::vector<Detection> StandardNms(std::span<const Detection> dets,
                                   const NmsParams& params);

// Same clustering as StandardNms, but each kept box is emitted only when its
// cluster (itself plus everything it suppressed) has at least two members,
// carrying the cluster's ClusterUncertainty. Degenerate clusters are dropped
// and counted in `diagnostics` when provided.
std::vector<PseudoLabel> NmsUnc(std::span<const Detection> dets,
                                const NmsParams& params,
                                NmsDiagnostics* diagnostics = nullptr);

}  // namespace pslabel

#endif  // PSLABEL_NMS_H_
