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

#include "pslabel/io.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "pslabel/error.h"

namespace pslabel {
namespace {

using nlohmann::json;
constexpr std::size_t kNoRecord = ParseError::kNoRecord;

json ParseJson(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

const json& Require(const json& obj, const char* key,
                    const std::string& section, std::size_t index) {
  if (!obj.is_object()) throw ParseError("record is not an object", section, index);
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing key \"") + key + "\"", section,
                     index);
  }
  return *it;
}

std::int64_t AsInt(const json& v, const char* key, const std::string& section,
                   std::size_t index) {
  if (!v.is_number_integer()) {
    throw ParseError(std::string("\"") + key + "\" must be an integer",
                     section, index);
  }
  return v.get<std::int64_t>();
}

double AsReal(const json& v, const char* key, const std::string& section,
              std::size_t index) {
  if (!v.is_number()) {
    throw ParseError(std::string("\"") + key + "\" must be a number", section,
                     index);
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ParseError(std::string("\"") + key + "\" must be finite", section,
                     index);
  }
  return d;
}

BBox AsBox(const json& v, const std::string& section, std::size_t index) {
  if (!v.is_array() || v.size() != 4) {
    throw ParseError("bbox must be an array [x, y, width, height]", section,
                     index);
  }
  double xywh[4];
  for (int k = 0; k < 4; ++k) xywh[k] = AsReal(v[k], "bbox", section, index);
  try {
    return BBox::FromXywh(xywh[0], xywh[1], xywh[2], xywh[3]);
  } catch (const InvalidArgumentError& e) {
    throw ParseError(std::string("malformed bbox: ") + e.what(), section,
                     index);
  }
}

const json& RequireArray(const json& root, const char* key) {
  if (!root.is_object()) throw ParseError("top level must be an object");
  auto it = root.find(key);
  if (it == root.end()) {
    throw ParseError(std::string("missing top-level key \"") + key + "\"");
  }
  if (!it->is_array()) {
    throw ParseError(std::string("\"") + key + "\" must be an array");
  }
  return *it;
}

Detection ParseDetectionRecord(const json& rec, const std::string& section,
                               std::size_t i) {
  Detection d;
  d.image_id = AsInt(Require(rec, "image_id", section, i), "image_id",
                     section, i);
  d.class_id = AsInt(Require(rec, "category_id", section, i), "category_id",
                     section, i);
  d.bbox = AsBox(Require(rec, "bbox", section, i), section, i);
  const double score =
      AsReal(Require(rec, "score", section, i), "score", section, i);
  if (score < 0.0 || score > 1.0) {
    throw ParseError("score outside [0, 1]", section, i);
  }
  if (auto it = rec.find("centerness"); it != rec.end() && !it->is_null()) {
    const double c = AsReal(*it, "centerness", section, i);
    if (c < 0.0 || c > 1.0) {
      throw ParseError("centerness outside [0, 1]", section, i);
    }
    d.centerness = c;
  }
  d.score = FinalScore(score, d.centerness);
  return d;
}

void AppendBoxRecord(std::string& out, std::int64_t image_id,
                     std::int64_t class_id, const BBox& box, double score) {
  const auto xywh = box.ToXywh();
  out += "{\"image_id\": " + std::to_string(image_id) +
         ", \"category_id\": " + std::to_string(class_id) + ", \"bbox\": [" +
         FormatReal(xywh[0]) + ", " + FormatReal(xywh[1]) + ", " +
         FormatReal(xywh[2]) + ", " + FormatReal(xywh[3]) +
         "], \"score\": " + FormatReal(score);
}

void AppendLabels(std::string& out, std::span<const PseudoLabel> labels) {
  out += "[";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const PseudoLabel& l = labels[i];
    out += i == 0 ? "\n  " : ",\n  ";
    AppendBoxRecord(out, l.image_id, l.class_id, l.bbox, l.score);
    out += ", \"uncertainty\": " + FormatReal(l.uncertainty) +
           ", \"cluster_size\": " + std::to_string(l.cluster_size) + "}";
  }
  out += labels.empty() ? "]" : "\n]";
}

std::string Fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double ParseCsvReal(const std::string& field, std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() ||
      !std::isfinite(v)) {
    throw ParseError("bad number \"" + field + "\"", "rows", row);
  }
  return v;
}

std::int64_t ParseCsvInt(const std::string& field, std::size_t row) {
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size() || v < 0) {
    throw ParseError("bad count \"" + field + "\"", "rows", row);
  }
  return v;
}

nlohmann::ordered_json ConfigJson(const SimConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_objects"] = cfg.n_objects;
  j["boxes_per_object"] = cfg.boxes_per_object;
  j["jitter_scale"] = cfg.jitter_scale;
  j["score_noise"] = cfg.score_noise;
  j["quality"] = cfg.quality;
  j["n_background_fp"] = cfg.n_background_fp;
  j["seed"] = cfg.seed;
  j["n_classes"] = cfg.n_classes;
  j["objects_per_image"] = cfg.objects_per_image;
  j["image_size"] = cfg.image_size;
  j["nms_iou_threshold"] = cfg.nms_iou_threshold;
  j["nms_score_threshold"] = cfg.nms_score_threshold;
  j["match_iou"] = cfg.match_iou;
  j["grid"] = {{"start", cfg.grid.start},
               {"stop", cfg.grid.stop},
               {"step", cfg.grid.step}};
  return j;
}

}  // namespace

std::string FormatReal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<GroundTruth> Dataset::AllGroundTruths() const {
  std::vector<GroundTruth> out;
  for (const auto& [image, gts] : by_image) {
    out.insert(out.end(), gts.begin(), gts.end());
  }
  return out;
}

std::size_t Dataset::size() const {
  std::size_t n = 0;
  for (const auto& [image, gts] : by_image) n += gts.size();
  return n;
}

Dataset ParseAnnotations(std::string_view json_text) {
  const json root = ParseJson(json_text);
  const json& images = RequireArray(root, "images");
  const json& annotations = RequireArray(root, "annotations");
  const json& categories = RequireArray(root, "categories");
  Dataset ds;
  for (std::size_t i = 0; i < images.size(); ++i) {
    ds.image_ids.insert(
        AsInt(Require(images[i], "id", "images", i), "id", "images", i));
  }
  for (std::size_t i = 0; i < categories.size(); ++i) {
    ds.category_ids.insert(AsInt(Require(categories[i], "id", "categories", i),
                                 "id", "categories", i));
  }
  const std::string section = "annotations";
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const json& a = annotations[i];
    const std::int64_t image_id =
        AsInt(Require(a, "image_id", section, i), "image_id", section, i);
    const std::int64_t category_id = AsInt(
        Require(a, "category_id", section, i), "category_id", section, i);
    if (!ds.image_ids.contains(image_id)) {
      throw ParseError("unknown image_id " + std::to_string(image_id),
                       section, i);
    }
    if (!ds.category_ids.contains(category_id)) {
      throw ParseError("unknown category_id " + std::to_string(category_id),
                       section, i);
    }
    const BBox box = AsBox(Require(a, "bbox", section, i), section, i);
    if (!(Area(box) > 0.0)) {
      throw ParseError("bbox must have positive area", section, i);
    }
    ds.by_image[image_id].emplace_back(box, category_id, image_id);
  }
  return ds;
}

Dataset LoadAnnotations(const std::filesystem::path& path) {
  return ParseAnnotations(ReadFile(path));
}

std::vector<Detection> ParseDetections(std::string_view json_text) {
  const json root = ParseJson(json_text);
  if (!root.is_array()) {
    throw ParseError("detections file must be a JSON array");
  }
  std::vector<Detection> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    out.push_back(ParseDetectionRecord(root[i], "detections", i));
  }
  return out;
}

std::vector<Detection> LoadDetections(const std::filesystem::path& path) {
  return ParseDetections(ReadFile(path));
}

std::string FormatDetections(std::span<const Detection> dets) {
  std::string out = "[";
  for (std::size_t i = 0; i < dets.size(); ++i) {
    out += i == 0 ? "\n  " : ",\n  ";
    AppendBoxRecord(out, dets[i].image_id, dets[i].class_id, dets[i].bbox,
                    dets[i].score);
    out += "}";
  }
  out += dets.empty() ? "]\n" : "\n]\n";
  return out;
}

std::string FormatPseudoLabels(std::span<const PseudoLabel> labels) {
  std::string out;
  AppendLabels(out, labels);
  out += "\n";
  return out;
}

std::vector<PseudoLabel> ParsePseudoLabels(std::string_view json_text) {
  const json root = ParseJson(json_text);
  if (!root.is_array()) {
    throw ParseError("pseudo-label file must be a JSON array");
  }
  const std::string section = "pseudo_labels";
  std::vector<PseudoLabel> out;
  out.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& rec = root[i];
    PseudoLabel l;
    l.image_id =
        AsInt(Require(rec, "image_id", section, i), "image_id", section, i);
    l.class_id = AsInt(Require(rec, "category_id", section, i), "category_id",
                       section, i);
    l.bbox = AsBox(Require(rec, "bbox", section, i), section, i);
    l.score = AsReal(Require(rec, "score", section, i), "score", section, i);
    if (l.score < 0.0 || l.score > 1.0) {
      throw ParseError("score outside [0, 1]", section, i);
    }
    l.uncertainty = AsReal(Require(rec, "uncertainty", section, i),
                           "uncertainty", section, i);
    if (l.uncertainty < 0.0) {
      throw ParseError("uncertainty must be >= 0", section, i);
    }
    const std::int64_t size = AsInt(Require(rec, "cluster_size", section, i),
                                    "cluster_size", section, i);
    if (size < 2) throw ParseError("cluster_size must be >= 2", section, i);
    l.cluster_size = static_cast<int>(size);
    out.push_back(l);
  }
  return out;
}

std::vector<PseudoLabel> LoadPseudoLabels(const std::filesystem::path& path) {
  return ParsePseudoLabels(ReadFile(path));
}

std::string FormatTargetSets(const TargetSets& sets, double sigma_cls,
                             double sigma_unc) {
  std::string out = "{\"sigma_cls\": " + FormatReal(sigma_cls) +
                    ", \"sigma_unc\": " + FormatReal(sigma_unc) +
                    ", \"n_cls\": " + std::to_string(sets.n_cls()) +
                    ", \"n_reg\": " + std::to_string(sets.n_reg()) +
                    ",\n\"cls_targets\": ";
  AppendLabels(out, sets.cls_targets);
  out += ",\n\"reg_targets\": ";
  AppendLabels(out, sets.reg_targets);
  out += "}\n";
  return out;
}

std::string FormatCurveCsv(const F1Curve& curve) {
  std::string out = "threshold,precision,recall,f1,tp,fp,n_gt\n";
  for (const PRPoint& p : curve.points) {
    out += Fixed6(p.threshold) + "," + Fixed6(p.precision) + "," +
           Fixed6(p.recall) + "," + Fixed6(p.f1) + "," +
           std::to_string(p.tp) + "," + std::to_string(p.fp) + "," +
           std::to_string(p.n_gt) + "\n";
  }
  return out;
}

F1Curve ParseCurveCsv(std::string_view csv_text) {
  std::istringstream in{std::string(csv_text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty curve file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "threshold,precision,recall,f1,tp,fp,n_gt") {
    throw ParseError("unexpected curve header \"" + line + "\"");
  }
  F1Curve curve;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 7) throw ParseError("expected 7 fields", "rows", row);
    PRPoint p;
    p.threshold = ParseCsvReal(fields[0], row);
    p.precision = ParseCsvReal(fields[1], row);
    p.recall = ParseCsvReal(fields[2], row);
    p.f1 = ParseCsvReal(fields[3], row);
    p.tp = ParseCsvInt(fields[4], row);
    p.fp = ParseCsvInt(fields[5], row);
    p.n_gt = ParseCsvInt(fields[6], row);
    if (!curve.points.empty() && p.threshold <= curve.points.back().threshold) {
      throw ParseError("thresholds must strictly increase", "rows", row);
    }
    curve.points.push_back(p);
    ++row;
  }
  if (curve.points.empty()) throw ParseError("curve has no rows");
  curve.grid.start = curve.points.front().threshold;
  curve.grid.stop = curve.points.back().threshold;
  curve.grid.step =
      curve.points.size() > 1
          ? std::round((curve.points[1].threshold - curve.grid.start) * 1e6) /
                1e6
          : 1.0;
  return curve;
}

F1Curve LoadCurveCsv(const std::filesystem::path& path) {
  return ParseCurveCsv(ReadFile(path));
}

std::string FormatHistoryCsv(std::span<const DsatHistoryEntry> history) {
  std::string out = "iteration,threshold,peak_f1\n";
  for (const DsatHistoryEntry& e : history) {
    out += std::to_string(e.iteration) + "," + Fixed6(e.threshold) + "," +
           Fixed6(e.peak_f1) + "\n";
  }
  return out;
}

ThresholdGrid ParseGrid(std::string_view spec) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : spec) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) {
    throw InvalidArgumentError("grid must be start:stop:step, got \"" +
                               std::string(spec) + "\"");
  }
  double v[3];
  for (int k = 0; k < 3; ++k) {
    char* end = nullptr;
    v[k] = std::strtod(parts[k].c_str(), &end);
    if (parts[k].empty() || end != parts[k].c_str() + parts[k].size()) {
      throw InvalidArgumentError("bad grid value \"" + parts[k] + "\"");
    }
  }
  ThresholdGrid grid{v[0], v[1], v[2]};
  grid.Validate();
  return grid;
}

SimConfig ParseSimConfig(std::string_view json_text, const SimConfig& base) {
  const json root = ParseJson(json_text);
  if (!root.is_object()) throw ParseError("config must be a JSON object");
  SimConfig cfg = base;
  const std::string section = "config";
  for (const auto& [key, value] : root.items()) {
    const char* k = key.c_str();
    auto as_int = [&] {
      return static_cast<int>(AsInt(value, k, section, kNoRecord));
    };
    auto as_real = [&] { return AsReal(value, k, section, kNoRecord); };
    if (key == "n_objects") {
      cfg.n_objects = as_int();
    } else if (key == "boxes_per_object") {
      cfg.boxes_per_object = as_int();
    } else if (key == "jitter_scale") {
      cfg.jitter_scale = as_real();
    } else if (key == "score_noise") {
      cfg.score_noise = as_real();
    } else if (key == "quality") {
      cfg.quality = as_real();
    } else if (key == "n_background_fp") {
      cfg.n_background_fp = as_int();
    } else if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ParseError("\"seed\" must be an integer");
      }
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "n_classes") {
      cfg.n_classes = as_int();
    } else if (key == "objects_per_image") {
      cfg.objects_per_image = as_int();
    } else if (key == "image_size") {
      cfg.image_size = as_real();
    } else if (key == "nms_iou_threshold") {
      cfg.nms_iou_threshold = as_real();
    } else if (key == "nms_score_threshold") {
      cfg.nms_score_threshold = as_real();
    } else if (key == "match_iou") {
      cfg.match_iou = as_real();
    } else if (key == "grid") {
      if (value.is_string()) {
        cfg.grid = ParseGrid(value.get<std::string>());
      } else {
        cfg.grid.start = AsReal(Require(value, "start", section, kNoRecord),
                                "start", section, kNoRecord);
        cfg.grid.stop = AsReal(Require(value, "stop", section, kNoRecord),
                               "stop", section, kNoRecord);
        cfg.grid.step = AsReal(Require(value, "step", section, kNoRecord),
                               "step", section, kNoRecord);
      }
    } else if (key == "schedule" || key == "fixed_sigma") {
      // Study parameters, read by the caller.
    } else {
      throw ParseError("unknown config key \"" + key + "\"");
    }
  }
  try {
    cfg.Validate();
  } catch (const InvalidArgumentError& e) {
    throw ParseError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

std::string FormatSimConfig(const SimConfig& cfg) {
  return ConfigJson(cfg).dump(2) + "\n";
}

std::string FormatStudySummary(const StudyReport& report) {
  nlohmann::ordered_json j;
  j["study"] = report.study;
  j["seed"] = report.seed;
  j["config"] = ConfigJson(report.config);
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.results) {
    if (std::isfinite(value)) {
      results[key] = value;
    } else {
      results[key] = nullptr;
    }
  }
  j["results"] = results;
  j["rows"] = report.rows.size();
  if (report.degenerate) {
    j["degenerate"] = true;
    j["note"] = report.note;
  }
  return j.dump(2) + "\n";
}

std::string FormatStudyCsv(const StudyReport& report) {
  std::string out;
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    out += (c ? "," : "") + report.columns[c];
  }
  out += "\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += (c ? "," : "") + FormatReal(row[c]);
    }
    out += "\n";
  }
  return out;
}

StudyFiles WriteStudy(const StudyReport& report,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string stem =
      report.study + "_seed" + std::to_string(report.seed);
  StudyFiles files{dir / (stem + ".csv"), dir / (stem + ".json")};
  WriteFile(files.csv, FormatStudyCsv(report));
  WriteFile(files.json, FormatStudySummary(report));
  return files;
}

}  // namespace pslabel
