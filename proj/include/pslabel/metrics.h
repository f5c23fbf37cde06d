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

#ifndef PSLABEL_METRICS_H_
#define PSLABEL_METRICS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "pslabel/geometry.h"
#include "pslabel/nms.h"

namespace pslabel {

inline constexpr double kDefaultMatchIou = 0.5;

// Annotated object. The box must have positive area.
struct GroundTruth {
  GroundTruth(const BBox& bbox, std::int64_t class_id, std::int64_t image_id);

  BBox bbox;
  std::int64_t class_id = 0;
  std::int64_t image_id = 0;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

// Inclusive confidence grid start, start + step, ..., stop.
struct ThresholdGrid {
  double start = 0.05;
  double stop = 0.95;
  double step = 0.05;

  // Throws InvalidArgumentError unless 0 <= start <= stop and step > 0.
  void Validate() const;

  // Generated by integer index; each value is snapped to 12 decimals so that
  // e.g. the default grid ends at exactly 0.95.
  std::vector<double> Thresholds() const;

  friend bool operator==(const ThresholdGrid&, const ThresholdGrid&) =
      default;
};

// Whether a detection scoring exactly t survives threshold t.
enum class ThresholdInclusion { kInclusive, kStrict };

struct PRPoint {
  double threshold = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t n_gt = 0;

  friend bool operator==(const PRPoint&, const PRPoint&) = default;
};

struct F1Curve {
  std::vector<PRPoint> points;
  ThresholdGrid grid;
  double match_iou = kDefaultMatchIou;
};

struct MatchResult {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  // Parallel to the input detections.
  std::vector<bool> matched;
};

// Harmonic mean of precision and recall; 0 when both are 0.
double F1(double precision, double recall);

// Builds a point from raw counts using the edge definitions: precision 1
// without predictions, recall 1 without ground truth.
PRPoint MakePRPoint(double threshold, std::int64_t tp, std::int64_t fp,
                    std::int64_t n_gt);

// Greedy matching within each (image, class): detections in RanksBefore
// order each take the unmatched ground truth of highest IoU (lowest index on
// ties) when that IoU is >= match_iou.
MatchResult MatchDetections(std::span<const Detection> dets,
                            std::span<const GroundTruth> gts,
                            double match_iou);

// Precision/recall/F1 at every grid threshold, pooling counts over all
// images and classes.
F1Curve PrCurve(std::span<const Detection> dets,
                std::span<const GroundTruth> gts, const ThresholdGrid& grid,
                double match_iou = kDefaultMatchIou,
                ThresholdInclusion inclusion = ThresholdInclusion::kInclusive);

// Pseudo labels scored against ground truth, treating each label as a
// detection.
std::vector<Detection> AsDetections(std::span<const PseudoLabel> labels);

}  // namespace pslabel

#endif  // PSLABEL_METRICS_H_
