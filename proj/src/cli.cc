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

#include "pslabel/cli.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "pslabel/dsat.h"
#include "pslabel/error.h"
#include "pslabel/io.h"
#include "pslabel/metrics.h"
#include "pslabel/nms.h"
#include "pslabel/sim.h"
#include "pslabel/targets.h"

namespace pslabel {
namespace {

constexpr double kDefaultFixedSigmaForStudy = 0.9;

std::string Shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string DefaultGridSpec() {
  const ThresholdGrid g;
  return Shortest(g.start) + ":" + Shortest(g.stop) + ":" + Shortest(g.step);
}

std::shared_ptr<spdlog::logger> MakeLogger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("pslabel", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* level = std::getenv("LOG_LEVEL")) {
    const std::string name(level);
    if (name == "error") logger->set_level(spdlog::level::err);
    if (name == "warn") logger->set_level(spdlog::level::warn);
    if (name == "info") logger->set_level(spdlog::level::info);
    if (name == "debug") logger->set_level(spdlog::level::debug);
  }
  return logger;
}

struct NmsArgs {
  std::string detections;
  std::string out;
  double iou_thr = kDefaultNmsIouThreshold;
  double score_thr = 0.0;
  bool literal_index = false;
};

struct CurveArgs {
  std::string detections;
  std::string annotations;
  std::string out;
  double match_iou = kDefaultMatchIou;
  std::string grid = DefaultGridSpec();
  bool strict = false;
};

struct FilterArgs {
  std::string pseudo;
  std::string cls_thr = Shortest(kDefaultClassificationThreshold);
  std::string curve;
  double unc_thr = kDefaultUncertaintyThreshold;
  std::string out;
};

struct SimulateArgs {
  std::string study;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
  std::optional<double> fixed_sigma;
};

int RunNmsUnc(const NmsArgs& a, spdlog::logger& log) {
  const std::vector<Detection> dets = LoadDetections(a.detections);
  NmsParams params;
  params.iou_threshold = a.iou_thr;
  params.score_threshold = a.score_thr;
  if (a.literal_index) params.indexing = UncertaintyIndexing::kLiteralSum;
  NmsDiagnostics diag;
  const std::vector<PseudoLabel> labels = NmsUnc(dets, params, &diag);
  WriteFile(a.out, FormatPseudoLabels(labels));
  log.info("{} detections -> {} pseudo labels ({} clusters, {} singleton "
           "drops, {} degenerate drops)",
           dets.size(), labels.size(), diag.clusters, diag.singleton_drops,
           diag.degenerate_drops);
  if (diag.singleton_drops > 0) {
    log.debug("singleton clusters dropped: {}", diag.singleton_drops);
  }
  return kExitOk;
}

int RunNms(const NmsArgs& a, spdlog::logger& log) {
  const std::vector<Detection> dets = LoadDetections(a.detections);
  NmsParams params;
  params.iou_threshold = a.iou_thr;
  params.score_threshold = a.score_thr;
  const std::vector<Detection> kept = StandardNms(dets, params);
  WriteFile(a.out, FormatDetections(kept));
  log.info("{} detections -> {} kept", dets.size(), kept.size());
  return kExitOk;
}

int RunF1Curve(const CurveArgs& a, spdlog::logger& log) {
  const ThresholdGrid grid = ParseGrid(a.grid);
  const std::vector<Detection> dets = LoadDetections(a.detections);
  const Dataset ds = LoadAnnotations(a.annotations);
  const F1Curve curve = PrCurve(
      dets, ds.AllGroundTruths(), grid, a.match_iou,
      a.strict ? ThresholdInclusion::kStrict : ThresholdInclusion::kInclusive);
  WriteFile(a.out, FormatCurveCsv(curve));
  log.info("curve over {} thresholds written to {}", curve.points.size(),
           a.out);
  return kExitOk;
}

int RunSelectThreshold(const std::string& curve_path, std::ostream& out) {
  const ThresholdChoice choice = SelectThreshold(LoadCurveCsv(curve_path));
  char f1[32];
  std::snprintf(f1, sizeof(f1), "%.6f", choice.peak_f1);
  out << Shortest(choice.threshold) << " " << f1 << "\n";
  return kExitOk;
}

int RunFilter(const FilterArgs& a, spdlog::logger& log) {
  double sigma_cls = 0.0;
  if (a.cls_thr == "auto") {
    if (a.curve.empty()) {
      throw InvalidArgumentError("--cls-thr auto requires --curve");
    }
    sigma_cls = SelectThreshold(LoadCurveCsv(a.curve)).threshold;
    log.info("auto classification threshold {}", sigma_cls);
  } else {
    char* end = nullptr;
    sigma_cls = std::strtod(a.cls_thr.c_str(), &end);
    if (a.cls_thr.empty() || end != a.cls_thr.c_str() + a.cls_thr.size() ||
        !(sigma_cls >= 0.0 && sigma_cls <= 1.0)) {
      throw InvalidArgumentError("--cls-thr must be a number in [0, 1] or "
                                 "'auto'");
    }
  }
  const std::vector<PseudoLabel> labels = LoadPseudoLabels(a.pseudo);
  const TargetSets sets = BuildTargetSets(labels, sigma_cls, a.unc_thr);
  WriteFile(a.out, FormatTargetSets(sets, sigma_cls, a.unc_thr));
  log.info("{} pseudo labels -> {} classification / {} regression targets",
           labels.size(), sets.n_cls(), sets.n_reg());
  return kExitOk;
}

int RunSimulate(const SimulateArgs& a, std::ostream& out,
                spdlog::logger& log) {
  SimConfig cfg =
      a.study == "sampling-ratio" ? LowConfidenceConfig() : SimConfig{};
  nlohmann::json extra = nlohmann::json::object();
  if (!a.config.empty()) {
    const std::string text = ReadFile(a.config);
    cfg = ParseSimConfig(text, cfg);
    extra = nlohmann::json::parse(text);
  }
  if (a.seed) cfg.seed = *a.seed;

  StudyReport report;
  try {
    if (a.study == "correlation") {
      report = RunCorrelationStudy(cfg);
    } else if (a.study == "dsat-trajectory") {
      std::vector<double> schedule = DefaultQualitySchedule();
      if (extra.contains("schedule")) {
        if (!extra["schedule"].is_array()) {
          throw ParseError("\"schedule\" must be an array of numbers");
        }
        schedule.clear();
        for (const auto& q : extra["schedule"]) {
          if (!q.is_number()) {
            throw ParseError("\"schedule\" must be an array of numbers");
          }
          schedule.push_back(q.get<double>());
        }
      }
      report = RunDsatTrajectory(schedule, cfg);
    } else {
      double sigma = kDefaultFixedSigmaForStudy;
      if (extra.contains("fixed_sigma")) {
        if (!extra["fixed_sigma"].is_number()) {
          throw ParseError("\"fixed_sigma\" must be a number");
        }
        sigma = extra["fixed_sigma"].get<double>();
      }
      if (a.fixed_sigma) sigma = *a.fixed_sigma;
      report = RunSamplingRatioStudy(cfg, sigma);
    }
  } catch (const DegenerateStudyError& e) {
    log.error("{}", e.what());
    return kExitDegenerate;
  }
  const StudyFiles files = WriteStudy(report, a.out);
  out << files.json.string() << "\n" << files.csv.string() << "\n";
  if (report.degenerate) {
    log.warn("degenerate study: {}", report.note);
    return kExitDegenerate;
  }
  return kExitOk;
}

}  // namespace

std::string DefaultsTable() {
  std::string t = "| setting | default |\n|---|---|\n";
  auto row = [&](const std::string& name, const std::string& value) {
    t += "| " + name + " | " + value + " |\n";
  };
  row("nms-unc --iou-thr", Shortest(kDefaultNmsIouThreshold));
  row("nms-unc --score-thr", Shortest(kDefaultPseudoLabelScoreThreshold));
  row("nms --iou-thr", Shortest(kDefaultNmsIouThreshold));
  row("nms --score-thr", Shortest(kDefaultInferenceScoreThreshold));
  row("f1-curve --match-iou", Shortest(kDefaultMatchIou));
  row("f1-curve --grid", DefaultGridSpec());
  row("filter --cls-thr", Shortest(kDefaultClassificationThreshold));
  row("filter --unc-thr", Shortest(kDefaultUncertaintyThreshold));
  row("DSAT update period (iterations)",
      std::to_string(kDefaultUpdatePeriodIters));
  row("EMA rate", Shortest(kDefaultEmaRate));
  row("simulate sampling-ratio --fixed-sigma",
      Shortest(kDefaultFixedSigmaForStudy));
  return t;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  auto log = MakeLogger(err);

  CLI::App app{"Pseudo-label selection for single-stage detectors",
               "pslabel"};
  app.require_subcommand(1);

  NmsArgs unc_args;
  unc_args.score_thr = kDefaultPseudoLabelScoreThreshold;
  auto* unc = app.add_subcommand(
      "nms-unc", "NMS that emits pseudo labels with regression uncertainty");
  unc->add_option("--detections", unc_args.detections,
                  "COCO results JSON")->required();
  unc->add_option("--iou-thr", unc_args.iou_thr, "IoU threshold")
      ->capture_default_str();
  unc->add_option("--score-thr", unc_args.score_thr, "score pre-filter")
      ->capture_default_str();
  unc->add_option("--out", unc_args.out, "pseudo-label JSON")->required();
  unc->add_flag("--literal-index", unc_args.literal_index,
                "pair deviations as std[i+j] instead of std[2i+j]");

  NmsArgs nms_args;
  nms_args.score_thr = kDefaultInferenceScoreThreshold;
  auto* nms = app.add_subcommand("nms", "standard greedy NMS");
  nms->add_option("--detections", nms_args.detections, "COCO results JSON")
      ->required();
  nms->add_option("--iou-thr", nms_args.iou_thr, "IoU threshold")
      ->capture_default_str();
  nms->add_option("--score-thr", nms_args.score_thr, "score pre-filter")
      ->capture_default_str();
  nms->add_option("--out", nms_args.out, "COCO results JSON")->required();

  CurveArgs curve_args;
  auto* curve = app.add_subcommand(
      "f1-curve", "precision/recall/F1 over a confidence grid");
  curve->add_option("--detections", curve_args.detections,
                    "COCO results or pseudo-label JSON")->required();
  curve->add_option("--annotations", curve_args.annotations,
                    "COCO annotations JSON")->required();
  curve->add_option("--match-iou", curve_args.match_iou, "match IoU")
      ->capture_default_str();
  curve->add_option("--grid", curve_args.grid, "start:stop:step")
      ->capture_default_str();
  curve->add_option("--out", curve_args.out, "curve CSV")->required();
  curve->add_flag("--strict", curve_args.strict,
                  "keep scores strictly above each threshold");

  std::string select_curve;
  auto* select = app.add_subcommand(
      "select-threshold", "print the F1-peak threshold of a curve");
  select->add_option("--curve", select_curve, "curve CSV")->required();

  FilterArgs filter_args;
  auto* filter = app.add_subcommand(
      "filter", "split pseudo labels into classification/regression targets");
  filter->add_option("--pseudo", filter_args.pseudo, "pseudo-label JSON")
      ->required();
  filter->add_option("--cls-thr", filter_args.cls_thr,
                     "score gate, or 'auto' to take the peak of --curve")
      ->capture_default_str();
  filter->add_option("--curve", filter_args.curve,
                     "curve CSV for --cls-thr auto");
  filter->add_option("--unc-thr", filter_args.unc_thr, "uncertainty gate")
      ->capture_default_str();
  filter->add_option("--out", filter_args.out, "target-set JSON")->required();

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "run a synthetic study");
  sim->add_option("study", sim_args.study, "study name")
      ->required()
      ->check(CLI::IsMember(
          {"correlation", "dsat-trajectory", "sampling-ratio"}));
  sim->add_option("--seed", sim_args.seed, "seed (overrides config)");
  sim->add_option("--config", sim_args.config, "JSON config");
  sim->add_option("--out", sim_args.out, "output directory")->required();
  sim->add_option("--fixed-sigma", sim_args.fixed_sigma,
                  "fixed threshold for sampling-ratio");

  auto* defaults = app.add_subcommand("defaults", "print CLI defaults");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub =
        app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (unc->parsed()) return RunNmsUnc(unc_args, *log);
    if (nms->parsed()) return RunNms(nms_args, *log);
    if (curve->parsed()) return RunF1Curve(curve_args, *log);
    if (select->parsed()) return RunSelectThreshold(select_curve, out);
    if (filter->parsed()) return RunFilter(filter_args, *log);
    if (sim->parsed()) return RunSimulate(sim_args, out, *log);
    if (defaults->parsed()) {
      out << DefaultsTable();
      return kExitOk;
    }
  } catch (const ParseError& e) {
    log->error("{}", e.what());
    return kExitInputFormat;
  } catch (const InvalidArgumentError& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const DegenerateStudyError& e) {
    log->error("{}", e.what());
    return kExitDegenerate;
  } catch (const Error& e) {
    log->error("{}", e.what());
    return kExitInputFormat;
  } catch (const nlohmann::json::exception& e) {
    log->error("{}", e.what());
    return kExitInputFormat;
  }
  return kExitUsage;
}

}  // namespace pslabel
