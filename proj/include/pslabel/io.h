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

// File formats. Boxes are COCO (x, y, width, height) on disk and corner
// format in memory; the conversion happens only here.
//
//   annotations   COCO instances JSON: "images", "annotations", "categories".
//   detections    COCO results JSON array of
//                 {image_id, category_id, bbox, score[, centerness]}.
//   pseudo labels detections records plus "uncertainty" and "cluster_size".
//   curves        CSV threshold,precision,recall,f1,tp,fp,n_gt (6 decimals).
//   DSAT history  CSV iteration,threshold,peak_f1.
//
// Reals in JSON output are written with 17 significant digits.

#ifndef PSLABEL_IO_H_
#define PSLABEL_IO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pslabel/dsat.h"
#include "pslabel/metrics.h"
#include "pslabel/nms.h"
#include "pslabel/sim.h"
#include "pslabel/targets.h"

namespace pslabel {

struct Dataset {
  std::map<std::int64_t, std::vector<GroundTruth>> by_image;
  std::set<std::int64_t> image_ids;
  std::set<std::int64_t> category_ids;

  // Every ground truth, ordered by image id then file order.
  std::vector<GroundTruth> AllGroundTruths() const;
  std::size_t size() const;
};

// All parse functions throw ParseError naming the offending record.
Dataset ParseAnnotations(std::string_view json_text);
Dataset LoadAnnotations(const std::filesystem::path& path);

// Scores are rescaled by centerness (product rule) when the record has one.
std::vector<Detection> ParseDetections(std::string_view json_text);
std::vector<Detection> LoadDetections(const std::filesystem::path& path);

std::string FormatDetections(std::span<const Detection> dets);

std::string FormatPseudoLabels(std::span<const PseudoLabel> labels);
std::vector<PseudoLabel> ParsePseudoLabels(std::string_view json_text);
std::vector<PseudoLabel> LoadPseudoLabels(const std::filesystem::path& path);

// {"sigma_cls", "sigma_unc", "cls_targets": [...], "reg_targets": [...]}
std::string FormatTargetSets(const TargetSets& sets, double sigma_cls,
                             double sigma_unc);

std::string FormatCurveCsv(const F1Curve& curve);
F1Curve ParseCurveCsv(std::string_view csv_text);
F1Curve LoadCurveCsv(const std::filesystem::path& path);

std::string FormatHistoryCsv(std::span<const DsatHistoryEntry> history);

// Parses "start:stop:step".
ThresholdGrid ParseGrid(std::string_view spec);

// Reads any subset of SimConfig fields; absent keys keep `base` values.
SimConfig ParseSimConfig(std::string_view json_text,
                         const SimConfig& base = SimConfig{});
std::string FormatSimConfig(const SimConfig& cfg);

// {"study", "seed", "config", "results"[, "degenerate", "note"]}
std::string FormatStudySummary(const StudyReport& report);
std::string FormatStudyCsv(const StudyReport& report);

struct StudyFiles {
  std::filesystem::path csv;
  std::filesystem::path json;
};

// Writes <dir>/<study>_seed<seed>.csv and .json, creating `dir`.
StudyFiles WriteStudy(const StudyReport& report,
                      const std::filesystem::path& dir);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// "%.17g"
std::string FormatReal(double v);

}  // namespace pslabel

#endif  // PSLABEL_IO_H_
