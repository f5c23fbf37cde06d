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

// Synthetic dense-prediction scenes and the statistical studies run on them.
//
// The generator is a study harness, not a detector model. Each ground-truth
// object gets `boxes_per_object` redundant predictions whose corners are the
// object's corners plus Gaussian noise with standard deviation
//
//   jitter_scale * (1 - quality) * difficulty * (width or height),
//
// where `difficulty` ~ U(0, 2) is drawn once per object, so some objects are
// predicted compactly and others are scattered. A prediction's score is
//
//   1 - 0.7 * (1 - quality) - (1 - IoU to its object)
//     + score_noise * (1 - quality) * N(0, 1),
//
// clamped to [0, 1]: better localized boxes and better teachers score higher,
// and a perfect teacher (quality 1) emits exact boxes at score 1. The quality
// knob deliberately moves calibration and localization together.
//
// Objects are laid out on a per-image grid of cells, one object per cell, so
// objects never overlap. `n_background_fp` extra boxes are scattered in small
// clumps at random positions with scores (1 - quality) * U(0.2, 1.0) and
// corner noise of 0.5 * jitter_scale * (width or height).
//
// Randomness comes from xoshiro256** (see random.h). Object k draws from
// substream k and background clump j from substream n_objects + j, so every
// scene is a pure function of the config.

#ifndef PSLABEL_SIM_H_
#define PSLABEL_SIM_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pslabel/metrics.h"
#include "pslabel/nms.h"

namespace pslabel {

struct SimConfig {
  int n_objects = 1000;
  int boxes_per_object = 8;
  double jitter_scale = 0.1;
  double score_noise = 0.05;
  double quality = 0.5;
  int n_background_fp = 200;
  std::uint64_t seed = 42;

  int n_classes = 3;
  int objects_per_image = 16;
  double image_size = 800.0;

  double nms_iou_threshold = kDefaultNmsIouThreshold;
  double nms_score_threshold = kDefaultPseudoLabelScoreThreshold;
  double match_iou = kDefaultMatchIou;
  ThresholdGrid grid;

  // Throws InvalidArgumentError on negative counts, jitter or noise, quality
  // outside [0, 1], or non-positive layout sizes.
  void Validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Config whose pseudo labels score about 0.6 on average, i.e. a teacher that is
// still poorly calibrated.
SimConfig LowConfidenceConfig();

struct Scene {
  std::vector<GroundTruth> gts;
  std::vector<Detection> dets;
  // Object index of each detection, or -1 for background.
  std::vector<int> source;
};

Scene GenerateScene(const SimConfig& cfg);

struct StudyReport {
  std::string study;
  std::uint64_t seed = 0;
  SimConfig config;
  // Named scalars in insertion order. Undefined values are NaN.
  std::vector<std::pair<std::string, double>> results;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  // Set when a headline statistic is undefined (e.g. zero variance).
  bool degenerate = false;
  std::string note;

  // Throws InvalidArgumentError for an unknown name.
  double Result(const std::string& name) const;

  friend bool operator==(const StudyReport&, const StudyReport&) = default;
};

// Uncertainty of every pseudo label versus its IoU with the best-matching
// object. Requires n_objects >= 100; throws DegenerateStudyError when fewer
// than two labels come out.
StudyReport RunCorrelationStudy(const SimConfig& cfg);

// Replays one scene at each scheduled teacher quality and records the
// threshold DSAT selects. Requires a non-empty schedule.
StudyReport RunDsatTrajectory(const std::vector<double>& schedule,
                              const SimConfig& cfg);

// Pseudo labels kept under the DSAT threshold (chosen on a separate
// validation scene) versus a fixed threshold.
StudyReport RunSamplingRatioStudy(const SimConfig& cfg, double fixed_sigma);

// Ten evenly spaced qualities from 0.3 to 1.0.
std::vector<double> DefaultQualitySchedule();

}  // namespace pslabel

#endif  // PSLABEL_SIM_H_
