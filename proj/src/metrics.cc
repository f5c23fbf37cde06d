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

#include "pslabel/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <utility>

#include "pslabel/error.h"

namespace pslabel {
namespace {

using GroupKey = std::pair<std::int64_t, std::int64_t>;  // image, class

bool Passes(double score, double threshold, ThresholdInclusion inclusion) {
  return inclusion == ThresholdInclusion::kInclusive ? score >= threshold
                                                     : score > threshold;
}

// Greedy match over all detections at once. Returns the matched flag of each
// detection and the global rank order the decisions were made in.
std::vector<bool> GreedyMatch(std::span<const Detection> dets,
                              std::span<const GroundTruth> gts,
                              double match_iou,
                              std::vector<std::size_t>* order_out) {
  std::map<GroupKey, std::vector<std::size_t>> gts_by_group;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gts_by_group[{gts[g].image_id, gts[g].class_id}].push_back(g);
  }
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return RanksBefore(dets[a], dets[b]);
                   });
  std::vector<bool> gt_taken(gts.size(), false);
  std::vector<bool> matched(dets.size(), false);
  for (std::size_t i : order) {
    const Detection& d = dets[i];
    auto it = gts_by_group.find({d.image_id, d.class_id});
    if (it == gts_by_group.end()) continue;
    double best_iou = -1.0;
    std::size_t best = 0;
    for (std::size_t g : it->second) {
      if (gt_taken[g]) continue;
      const double iou = Iou(d.bbox, gts[g].bbox);
      if (iou > best_iou) {
        best_iou = iou;
        best = g;
      }
    }
    if (best_iou >= match_iou) {
      gt_taken[best] = true;
      matched[i] = true;
    }
  }
  if (order_out != nullptr) *order_out = std::move(order);
  return matched;
}

}  // namespace

GroundTruth::GroundTruth(const BBox& bbox, std::int64_t class_id,
                         std::int64_t image_id)
    : bbox(bbox), class_id(class_id), image_id(image_id) {
  if (!(Area(bbox) > 0.0)) {
    throw InvalidArgumentError("ground-truth box must have positive area");
  }
}

void ThresholdGrid::Validate() const {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step)) {
    throw InvalidArgumentError("grid values must be finite");
  }
  if (!(step > 0.0)) throw InvalidArgumentError("grid step must be positive");
  if (start > stop) throw InvalidArgumentError("grid start exceeds stop");
  if (start < 0.0 || stop > 1.0) {
    throw InvalidArgumentError("grid must lie within [0, 1]");
  }
}

std::vector<double> ThresholdGrid::Thresholds() const {
  Validate();
  const auto count =
      static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double raw = start + static_cast<double>(k) * step;
    out.push_back(std::round(raw * 1e12) / 1e12);
  }
  return out;
}

double F1(double precision, double recall) {
  const double denom = precision + recall;
  if (denom == 0.0) return 0.0;
  return 2.0 * precision * recall / denom;
}

PRPoint MakePRPoint(double threshold, std::int64_t tp, std::int64_t fp,
                    std::int64_t n_gt) {
  PRPoint p;
  p.threshold = threshold;
  p.tp = tp;
  p.fp = fp;
  p.n_gt = n_gt;
  p.precision = tp + fp > 0 ? static_cast<double>(tp) /
                                  static_cast<double>(tp + fp)
                            : 1.0;
  p.recall = n_gt > 0 ? static_cast<double>(tp) / static_cast<double>(n_gt)
                      : 1.0;
  p.f1 = F1(p.precision, p.recall);
  return p;
}

MatchResult MatchDetections(std::span<const Detection> dets,
                            std::span<const GroundTruth> gts,
                            double match_iou) {
  MatchResult result;
  result.matched = GreedyMatch(dets, gts, match_iou, nullptr);
  for (bool m : result.matched) {
    if (m) {
      ++result.tp;
    } else {
      ++result.fp;
    }
  }
  return result;
}

// Greedy decisions depend only on higher-ranked detections, so the matching
// of {score passes t} is a prefix of the full matching: one pass plus a sweep
// over thresholds gives every point.
F1Curve PrCurve(std::span<const Detection> dets,
                std::span<const GroundTruth> gts, const ThresholdGrid& grid,
                double match_iou, ThresholdInclusion inclusion) {
  const std::vector<double> thresholds = grid.Thresholds();
  if (thresholds.empty()) throw InvalidArgumentError("empty threshold grid");

  std::vector<std::size_t> order;
  const std::vector<bool> matched = GreedyMatch(dets, gts, match_iou, &order);
  const auto n_gt = static_cast<std::int64_t>(gts.size());

  F1Curve curve;
  curve.grid = grid;
  curve.match_iou = match_iou;
  curve.points.reserve(thresholds.size());
  // Walk thresholds from high to low while extending the ranked prefix.
  std::vector<PRPoint> reversed;
  std::size_t cursor = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (auto t = thresholds.rbegin(); t != thresholds.rend(); ++t) {
    while (cursor < order.size() &&
           Passes(dets[order[cursor]].score, *t, inclusion)) {
      if (matched[order[cursor]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++cursor;
    }
    reversed.push_back(MakePRPoint(*t, tp, fp, n_gt));
  }
  curve.points.assign(reversed.rbegin(), reversed.rend());
  return curve;
}

std::vector<Detection> AsDetections(std::span<const PseudoLabel> labels) {
  std::vector<Detection> out;
  out.reserve(labels.size());
  for (const PseudoLabel& l : labels) {
    out.push_back(Detection{l.bbox, l.score, std::nullopt, l.class_id,
                            l.image_id});
  }
  return out;
}

}  // namespace pslabel
