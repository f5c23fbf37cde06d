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

#include "pslabel/sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "pslabel/dsat.h"
#include "pslabel/error.h"
#include "pslabel/random.h"
#include "pslabel/stats.h"

namespace pslabel {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCalibrationSpan = 0.7;
constexpr double kIouGain = 1.0;
// Background clump spread relative to jitter_scale.
constexpr double kBackgroundJitterRatio = 0.5;

BBox Jitter(const BBox& base, double sx, double sy, Rng& rng) {
  double x1 = base.x1() + sx * rng.Normal();
  double y1 = base.y1() + sy * rng.Normal();
  double x2 = base.x2() + sx * rng.Normal();
  double y2 = base.y2() + sy * rng.Normal();
  if (x2 < x1) std::swap(x1, x2);
  if (y2 < y1) std::swap(y1, y2);
  return BBox(x1, y1, x2, y2);
}

int ImageCount(const SimConfig& cfg) {
  return std::max(1, (cfg.n_objects + cfg.objects_per_image - 1) /
                         cfg.objects_per_image);
}

NmsParams SceneNmsParams(const SimConfig& cfg) {
  NmsParams params;
  params.iou_threshold = cfg.nms_iou_threshold;
  params.score_threshold = cfg.nms_score_threshold;
  return params;
}

// Best IoU between `box` and any object of the same image and class.
double BestGtIou(const BBox& box, std::int64_t image_id, std::int64_t class_id,
                 const std::map<std::pair<std::int64_t, std::int64_t>,
                                std::vector<BBox>>& index) {
  auto it = index.find({image_id, class_id});
  if (it == index.end()) return 0.0;
  double best = 0.0;
  for (const BBox& g : it->second) best = std::max(best, Iou(box, g));
  return best;
}

std::map<std::pair<std::int64_t, std::int64_t>, std::vector<BBox>> IndexGts(
    const std::vector<GroundTruth>& gts) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<BBox>> index;
  for (const GroundTruth& g : gts) {
    index[{g.image_id, g.class_id}].push_back(g.bbox);
  }
  return index;
}

StudyReport NewReport(const std::string& name, const SimConfig& cfg) {
  StudyReport report;
  report.study = name;
  report.seed = cfg.seed;
  report.config = cfg;
  return report;
}

}  // namespace

void SimConfig::Validate() const {
  if (n_objects < 0 || boxes_per_object < 0 || n_background_fp < 0) {
    throw InvalidArgumentError("simulation counts must be >= 0");
  }
  if (!(jitter_scale >= 0.0) || !std::isfinite(jitter_scale)) {
    throw InvalidArgumentError("jitter_scale must be >= 0");
  }
  if (!(score_noise >= 0.0) || !std::isfinite(score_noise)) {
    throw InvalidArgumentError("score_noise must be >= 0");
  }
  if (!(quality >= 0.0 && quality <= 1.0)) {
    throw InvalidArgumentError("quality must lie in [0, 1]");
  }
  if (n_classes <= 0 || objects_per_image <= 0 || !(image_size > 0.0)) {
    throw InvalidArgumentError(
        "n_classes, objects_per_image and image_size must be positive");
  }
  grid.Validate();
}

SimConfig LowConfidenceConfig() {
  SimConfig cfg;
  cfg.quality = 0.52;
  cfg.seed = 7;
  return cfg;
}

std::vector<double> DefaultQualitySchedule() {
  std::vector<double> schedule;
  for (int k = 0; k < 10; ++k) {
    schedule.push_back(std::round((0.3 + 0.7 * k / 9.0) * 1e12) / 1e12);
  }
  return schedule;
}

Scene GenerateScene(const SimConfig& cfg) {
  cfg.Validate();
  Scene scene;
  const int side = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(cfg.objects_per_image))));
  const double cell = cfg.image_size / side;
  const double slack = 1.0 - cfg.quality;

  for (int k = 0; k < cfg.n_objects; ++k) {
    Rng rng = Rng::Substream(cfg.seed, static_cast<std::uint64_t>(k));
    const int image = k / cfg.objects_per_image;
    const int slot = k % cfg.objects_per_image;
    const double cx = (slot % side) * cell;
    const double cy = (slot / side) * cell;
    const double w = rng.Uniform(0.3, 0.9) * cell;
    const double h = rng.Uniform(0.3, 0.9) * cell;
    const double x1 = cx + rng.Uniform() * (cell - w);
    const double y1 = cy + rng.Uniform() * (cell - h);
    const auto cls = static_cast<std::int64_t>(
        rng.Below(static_cast<std::uint64_t>(cfg.n_classes)));
    const double difficulty = rng.Uniform(0.0, 2.0);
    const BBox gt(x1, y1, x1 + w, y1 + h);
    scene.gts.emplace_back(gt, cls, image);

    const double sx = cfg.jitter_scale * slack * difficulty * w;
    const double sy = cfg.jitter_scale * slack * difficulty * h;
    for (int b = 0; b < cfg.boxes_per_object; ++b) {
      const BBox box = Jitter(gt, sx, sy, rng);
      const double noise = rng.Normal();
      const double score =
          1.0 - kCalibrationSpan * slack - kIouGain * (1.0 - Iou(box, gt)) +
          cfg.score_noise * slack * noise;
      scene.dets.push_back(
          Detection{box, std::clamp(score, 0.0, 1.0), std::nullopt, cls,
                    image});
      scene.source.push_back(k);
    }
  }

  const int n_images = ImageCount(cfg);
  int remaining = cfg.n_background_fp;
  for (std::uint64_t j = 0; remaining > 0; ++j) {
    Rng rng = Rng::Substream(
        cfg.seed, static_cast<std::uint64_t>(cfg.n_objects) + j);
    const int clump = std::min(remaining, 1 + static_cast<int>(rng.Below(3)));
    remaining -= clump;
    const auto image = static_cast<std::int64_t>(
        rng.Below(static_cast<std::uint64_t>(n_images)));
    const auto cls = static_cast<std::int64_t>(
        rng.Below(static_cast<std::uint64_t>(cfg.n_classes)));
    const double w = rng.Uniform(0.2, 0.6) * cell;
    const double h = rng.Uniform(0.2, 0.6) * cell;
    const double x1 = rng.Uniform() * (cfg.image_size - w);
    const double y1 = rng.Uniform() * (cfg.image_size - h);
    const BBox anchor(x1, y1, x1 + w, y1 + h);
    const double spread = kBackgroundJitterRatio * cfg.jitter_scale;
    for (int b = 0; b < clump; ++b) {
      const BBox box = Jitter(anchor, spread * w, spread * h, rng);
      const double score = slack * rng.Uniform(0.2, 1.0);
      scene.dets.push_back(
          Detection{box, std::clamp(score, 0.0, 1.0), std::nullopt, cls,
                    image});
      scene.source.push_back(-1);
    }
  }
  return scene;
}

double StudyReport::Result(const std::string& name) const {
  for (const auto& [key, value] : results) {
    if (key == name) return value;
  }
  throw InvalidArgumentError("no study result named '" + name + "'");
}

StudyReport RunCorrelationStudy(const SimConfig& cfg) {
  if (cfg.n_objects < 100) {
    throw InvalidArgumentError("correlation study needs n_objects >= 100");
  }
  const Scene scene = GenerateScene(cfg);
  const std::vector<PseudoLabel> labels =
      NmsUnc(scene.dets, SceneNmsParams(cfg));
  if (labels.size() < 2) {
    throw DegenerateStudyError("correlation study emitted " +
                               std::to_string(labels.size()) +
                               " pseudo labels; need at least 2");
  }
  const auto index = IndexGts(scene.gts);
  std::vector<double> unc, iou;
  StudyReport report = NewReport("correlation", cfg);
  report.columns = {"image_id", "class_id", "score", "uncertainty", "iou"};
  for (const PseudoLabel& l : labels) {
    unc.push_back(l.uncertainty);
    iou.push_back(BestGtIou(l.bbox, l.image_id, l.class_id, index));
    report.rows.push_back({static_cast<double>(l.image_id),
                           static_cast<double>(l.class_id), l.score,
                           unc.back(), iou.back()});
  }
  const std::optional<double> rho = Spearman(unc, iou);
  const std::optional<double> r = Pearson(unc, iou);
  const std::optional<LineFit> fit = FitLine(unc, iou);
  double mean_unc = 0.0, mean_iou = 0.0;
  for (std::size_t i = 0; i < unc.size(); ++i) {
    mean_unc += unc[i];
    mean_iou += iou[i];
  }
  mean_unc /= static_cast<double>(unc.size());
  mean_iou /= static_cast<double>(iou.size());
  report.results = {
      {"n_labels", static_cast<double>(labels.size())},
      {"spearman_rho", rho.value_or(kNaN)},
      {"pearson_r", r.value_or(kNaN)},
      {"slope", fit ? fit->slope : kNaN},
      {"intercept", fit ? fit->intercept : kNaN},
      {"mean_uncertainty", mean_unc},
      {"mean_iou", mean_iou},
  };
  if (!rho || !fit) {
    report.degenerate = true;
    report.note = "uncertainty or IoU has zero variance; correlation undefined";
  }
  return report;
}

StudyReport RunDsatTrajectory(const std::vector<double>& schedule,
                              const SimConfig& cfg) {
  if (schedule.empty()) {
    throw InvalidArgumentError("quality schedule must not be empty");
  }
  StudyReport report = NewReport("dsat-trajectory", cfg);
  report.columns = {"step",    "iteration", "quality",
                    "threshold", "peak_f1", "n_labels"};
  DsatState state;
  state.grid = cfg.grid;
  state.match_iou = cfg.match_iou;
  std::set<double> distinct;
  int changes = 0;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    SimConfig step_cfg = cfg;
    step_cfg.quality = schedule[k];
    const Scene scene = GenerateScene(step_cfg);
    const std::vector<PseudoLabel> labels =
        NmsUnc(scene.dets, SceneNmsParams(step_cfg));
    const std::vector<Detection> dets = AsDetections(labels);
    const auto iteration =
        static_cast<std::int64_t>(k + 1) * state.update_period_iters;
    state = MaybeUpdate(state, iteration, dets, scene.gts);
    const DsatHistoryEntry& entry = state.history.back();
    if (k > 0 && entry.threshold != state.history[k - 1].threshold) ++changes;
    distinct.insert(entry.threshold);
    report.rows.push_back({static_cast<double>(k),
                           static_cast<double>(iteration), schedule[k],
                           entry.threshold, entry.peak_f1,
                           static_cast<double>(labels.size())});
  }
  report.results = {
      {"n_steps", static_cast<double>(schedule.size())},
      {"n_changes", static_cast<double>(changes)},
      {"n_distinct_thresholds", static_cast<double>(distinct.size())},
      {"first_threshold", state.history.front().threshold},
      {"last_threshold", state.history.back().threshold},
  };
  return report;
}

StudyReport RunSamplingRatioStudy(const SimConfig& cfg, double fixed_sigma) {
  if (!(fixed_sigma >= 0.0 && fixed_sigma <= 1.0)) {
    throw InvalidArgumentError("fixed threshold must lie in [0, 1]");
  }
  const NmsParams params = SceneNmsParams(cfg);

  SimConfig val_cfg = cfg;
  std::uint64_t derive = cfg.seed;
  val_cfg.seed = SplitMix64(derive);
  const Scene val = GenerateScene(val_cfg);
  const std::vector<Detection> val_dets =
      AsDetections(NmsUnc(val.dets, params));
  const ThresholdChoice choice = SelectThreshold(
      PrCurve(val_dets, val.gts, cfg.grid, cfg.match_iou));

  const Scene scene = GenerateScene(cfg);
  const std::vector<PseudoLabel> labels = NmsUnc(scene.dets, params);
  StudyReport report = NewReport("sampling-ratio", cfg);
  report.columns = {"image_id", "class_id", "score", "uncertainty",
                    "kept_dsat", "kept_fixed"};
  std::int64_t n_dsat = 0, n_fixed = 0;
  double score_sum = 0.0;
  for (const PseudoLabel& l : labels) {
    const bool kept_dsat = l.score >= choice.threshold;
    const bool kept_fixed = l.score >= fixed_sigma;
    n_dsat += kept_dsat;
    n_fixed += kept_fixed;
    score_sum += l.score;
    report.rows.push_back({static_cast<double>(l.image_id),
                           static_cast<double>(l.class_id), l.score,
                           l.uncertainty, kept_dsat ? 1.0 : 0.0,
                           kept_fixed ? 1.0 : 0.0});
  }
  const double n_obj = std::max(1, cfg.n_objects);
  report.results = {
      {"dsat_threshold", choice.threshold},
      {"dsat_peak_f1", choice.peak_f1},
      {"fixed_threshold", fixed_sigma},
      {"n_objects", static_cast<double>(cfg.n_objects)},
      {"n_labels", static_cast<double>(labels.size())},
      {"mean_label_score",
       labels.empty() ? kNaN : score_sum / static_cast<double>(labels.size())},
      {"n_dsat", static_cast<double>(n_dsat)},
      {"n_fixed", static_cast<double>(n_fixed)},
      {"ratio_dsat", static_cast<double>(n_dsat) / n_obj},
      {"ratio_fixed", static_cast<double>(n_fixed) / n_obj},
      {"dsat_over_fixed",
       n_fixed > 0 ? static_cast<double>(n_dsat) / static_cast<double>(n_fixed)
                   : kNaN},
  };
  return report;
}

}  // namespace pslabel
