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

// Test-only reference implementations. None of these call into the library
// code paths they are used to check (they only share the value types and
// Iou).

#ifndef PSLABEL_TESTS_ORACLES_ORACLES_H_
#define PSLABEL_TESTS_ORACLES_ORACLES_H_

#include <cstdint>
#include <vector>

#include "pslabel/dsat.h"
#include "pslabel/metrics.h"
#include "pslabel/nms.h"
#include "pslabel/random.h"

namespace pslabel::oracle {

// Literal pool-based transcription of the suppression loop: filter by score,
// repeatedly take the maximum-score box, sweep the remaining pool and move
// every box with IoU >= delta (and the pivot itself) into the cluster, emit
// the pivot when the cluster holds more than one box. Runs per (image,
// class); O(n^2).
std::vector<PseudoLabel> LiteralNmsUnc(
    const std::vector<Detection>& dets, double delta, double mu,
    UncertaintyIndexing indexing = UncertaintyIndexing::kCornerAxis);

// Literal greedy NMS with the same pool semantics.
std::vector<Detection> LiteralStandardNms(const std::vector<Detection>& dets,
                                          double delta, double mu);

// Cluster uncertainty computed directly from the definition.
double DirectUncertainty(const std::vector<BBox>& cluster);

// Reruns greedy matching from scratch on {score >= t} for every grid point.
F1Curve BruteForcePrCurve(const std::vector<Detection>& dets,
                          const std::vector<GroundTruth>& gts,
                          const ThresholdGrid& grid, double match_iou,
                          bool strict = false);

// Greedy matcher written independently of the library.
std::int64_t GreedyTruePositives(const std::vector<Detection>& dets,
                                 const std::vector<GroundTruth>& gts,
                                 double match_iou);

// Maximum-cardinality matching (augmenting paths) between detections and
// ground truths of the same image and class with IoU >= match_iou.
std::int64_t OptimalTruePositives(const std::vector<Detection>& dets,
                                  const std::vector<GroundTruth>& gts,
                                  double match_iou);

// Linear scan argmax of f1 with ties going to the later grid point.
ThresholdChoice BruteForceArgmax(const F1Curve& curve);

// Small random scenes with lattice-snapped coordinates and quantized scores
// so that ties and heavy overlaps are common.
std::vector<Detection> RandomDetections(Rng& rng, int max_boxes,
                                        int n_images = 2, int n_classes = 2);
std::vector<GroundTruth> RandomGroundTruths(Rng& rng, int max_boxes,
                                            int n_images = 2,
                                            int n_classes = 2);

struct Scene {
  std::vector<Detection> dets;
  std::vector<GroundTruth> gts;
};
// Detections and ground truths jittered around shared anchors so that many
// pairs overlap at typical match thresholds. Each side holds <= max_boxes.
Scene RandomScene(Rng& rng, int max_boxes, int n_images = 2,
                  int n_classes = 2);

// Random (possibly degenerate) cluster of 2..max_size boxes.
std::vector<BBox> RandomCluster(Rng& rng, int max_size);

}  // namespace pslabel::oracle

#endif  // PSLABEL_TESTS_ORACLES_ORACLES_H_
