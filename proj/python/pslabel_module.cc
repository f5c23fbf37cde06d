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

// Array-in/array-out entry points over the core library. Inputs are taken
// as C-contiguous float64/int64 arrays; conforming arrays are read in place
// and anything else is converted once.

#include <pybind11/gil_safe_call_once.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "pslabel/dsat.h"
#include "pslabel/error.h"
#include "pslabel/metrics.h"
#include "pslabel/nms.h"
#include "pslabel/targets.h"

namespace py = pybind11;

namespace pslabel {
namespace {

using F64 = py::array_t<double, py::array::c_style | py::array::forcecast>;
using I64 =
    py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

void CheckRows(const F64& boxes, const char* name) {
  if (boxes.ndim() != 2 || boxes.shape(1) != 4) {
    throw InvalidArgumentError(std::string(name) +
                               " must have shape (N, 4)");
  }
}

void CheckColumn(py::ssize_t n, const py::array& column, const char* name) {
  if (column.ndim() != 1 || column.shape(0) != n) {
    throw InvalidArgumentError(std::string(name) + " must have shape (" +
                               std::to_string(n) + ",)");
  }
}

std::vector<Detection> ToDetections(const F64& boxes, const F64& scores,
                                    const std::optional<I64>& classes,
                                    const std::optional<I64>& image_ids,
                                    const std::optional<F64>& centerness) {
  CheckRows(boxes, "boxes");
  const py::ssize_t n = boxes.shape(0);
  CheckColumn(n, scores, "scores");
  if (classes) CheckColumn(n, *classes, "classes");
  if (image_ids) CheckColumn(n, *image_ids, "image_ids");
  if (centerness) CheckColumn(n, *centerness, "centerness");
  const auto b = boxes.unchecked<2>();
  const auto s = scores.unchecked<1>();
  std::vector<Detection> dets;
  dets.reserve(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    Detection d;
    d.bbox = BBox(b(i, 0), b(i, 1), b(i, 2), b(i, 3));
    d.score = s(i);
    if (centerness) {
      d.centerness = centerness->at(i);
      d.score = FinalScore(d.score, d.centerness);
    }
    if (classes) d.class_id = classes->at(i);
    if (image_ids) d.image_id = image_ids->at(i);
    dets.push_back(d);
  }
  return dets;
}

F64 BoxesOf(const std::vector<BBox>& boxes) {
  F64 out({static_cast<py::ssize_t>(boxes.size()), py::ssize_t{4}});
  auto o = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto c = boxes[i].corners();
    for (int k = 0; k < 4; ++k) o(static_cast<py::ssize_t>(i), k) = c[k];
  }
  return out;
}

template <typename T, typename Fn>
py::array_t<T> ColumnOf(std::size_t n, Fn&& value) {
  py::array_t<T> out(static_cast<py::ssize_t>(n));
  auto o = out.template mutable_unchecked<1>();
  for (std::size_t i = 0; i < n; ++i) {
    o(static_cast<py::ssize_t>(i)) = value(i);
  }
  return out;
}

NmsParams MakeParams(double iou_thr, double score_thr, bool literal_index) {
  NmsParams p;
  p.iou_threshold = iou_thr;
  p.score_threshold = score_thr;
  if (literal_index) p.indexing = UncertaintyIndexing::kLiteralSum;
  return p;
}

py::tuple PyNmsUnc(const F64& boxes, const F64& scores,
                   const std::optional<I64>& classes,
                   const std::optional<I64>& image_ids,
                   const std::optional<F64>& centerness, double iou_thr,
                   double score_thr, bool literal_index) {
  const auto dets = ToDetections(boxes, scores, classes, image_ids, centerness);
  std::vector<PseudoLabel> labels;
  NmsDiagnostics diag;
  {
    py::gil_scoped_release release;
    labels = NmsUnc(dets, MakeParams(iou_thr, score_thr, literal_index), &diag);
  }
  std::vector<BBox> kept;
  for (const auto& l : labels) kept.push_back(l.bbox);
  const std::size_t n = labels.size();
  py::dict diagnostics;
  diagnostics["clusters"] = diag.clusters;
  diagnostics["singleton_drops"] = diag.singleton_drops;
  diagnostics["degenerate_drops"] = diag.degenerate_drops;
  return py::make_tuple(
      BoxesOf(kept),
      ColumnOf<double>(n, [&](std::size_t i) { return labels[i].score; }),
      ColumnOf<std::int64_t>(n,
                             [&](std::size_t i) { return labels[i].class_id; }),
      ColumnOf<std::int64_t>(n,
                             [&](std::size_t i) { return labels[i].image_id; }),
      ColumnOf<double>(n,
                       [&](std::size_t i) { return labels[i].uncertainty; }),
      ColumnOf<std::int64_t>(
          n, [&](std::size_t i) { return labels[i].cluster_size; }),
      diagnostics);
}

py::tuple PyStandardNms(const F64& boxes, const F64& scores,
                        const std::optional<I64>& classes,
                        const std::optional<I64>& image_ids,
                        const std::optional<F64>& centerness, double iou_thr,
                        double score_thr) {
  const auto dets = ToDetections(boxes, scores, classes, image_ids, centerness);
  std::vector<Detection> kept;
  {
    py::gil_scoped_release release;
    kept = StandardNms(dets, MakeParams(iou_thr, score_thr, false));
  }
  std::vector<BBox> kb;
  for (const auto& d : kept) kb.push_back(d.bbox);
  const std::size_t n = kept.size();
  return py::make_tuple(
      BoxesOf(kb),
      ColumnOf<double>(n, [&](std::size_t i) { return kept[i].score; }),
      ColumnOf<std::int64_t>(n, [&](std::size_t i) { return kept[i].class_id; }),
      ColumnOf<std::int64_t>(n,
                             [&](std::size_t i) { return kept[i].image_id; }));
}

py::dict PyPrCurve(const F64& boxes, const F64& scores,
                   const std::optional<I64>& classes,
                   const std::optional<I64>& image_ids, const F64& gt_boxes,
                   const std::optional<I64>& gt_classes,
                   const std::optional<I64>& gt_image_ids,
                   std::tuple<double, double, double> grid, double match_iou,
                   bool strict) {
  const auto dets =
      ToDetections(boxes, scores, classes, image_ids, std::nullopt);
  CheckRows(gt_boxes, "gt_boxes");
  const py::ssize_t m = gt_boxes.shape(0);
  if (gt_classes) CheckColumn(m, *gt_classes, "gt_classes");
  if (gt_image_ids) CheckColumn(m, *gt_image_ids, "gt_image_ids");
  const auto g = gt_boxes.unchecked<2>();
  std::vector<GroundTruth> gts;
  for (py::ssize_t i = 0; i < m; ++i) {
    gts.emplace_back(BBox(g(i, 0), g(i, 1), g(i, 2), g(i, 3)),
                     gt_classes ? gt_classes->at(i) : 0,
                     gt_image_ids ? gt_image_ids->at(i) : 0);
  }
  const ThresholdGrid tg{std::get<0>(grid), std::get<1>(grid),
                         std::get<2>(grid)};
  F1Curve curve;
  {
    py::gil_scoped_release release;
    curve = PrCurve(dets, gts, tg, match_iou,
                    strict ? ThresholdInclusion::kStrict
                           : ThresholdInclusion::kInclusive);
  }
  const auto& p = curve.points;
  const std::size_t n = p.size();
  py::dict out;
  out["threshold"] = ColumnOf<double>(n, [&](auto i) { return p[i].threshold; });
  out["precision"] = ColumnOf<double>(n, [&](auto i) { return p[i].precision; });
  out["recall"] = ColumnOf<double>(n, [&](auto i) { return p[i].recall; });
  out["f1"] = ColumnOf<double>(n, [&](auto i) { return p[i].f1; });
  out["tp"] = ColumnOf<std::int64_t>(n, [&](auto i) { return p[i].tp; });
  out["fp"] = ColumnOf<std::int64_t>(n, [&](auto i) { return p[i].fp; });
  out["n_gt"] = ColumnOf<std::int64_t>(n, [&](auto i) { return p[i].n_gt; });
  return out;
}

py::tuple PySelectThreshold(const F64& thresholds, const F64& f1) {
  if (thresholds.ndim() != 1) {
    throw InvalidArgumentError("thresholds must be one-dimensional");
  }
  CheckColumn(thresholds.shape(0), f1, "f1");
  F1Curve curve;
  for (py::ssize_t i = 0; i < thresholds.shape(0); ++i) {
    PRPoint p;
    p.threshold = thresholds.at(i);
    p.f1 = f1.at(i);
    curve.points.push_back(p);
  }
  const ThresholdChoice c = SelectThreshold(curve);
  return py::make_tuple(c.threshold, c.peak_f1);
}

py::tuple PyBuildTargetSets(const F64& scores, const F64& uncertainty,
                            double sigma_cls, double sigma_unc) {
  if (scores.ndim() != 1) {
    throw InvalidArgumentError("scores must be one-dimensional");
  }
  const py::ssize_t n = scores.shape(0);
  CheckColumn(n, uncertainty, "uncertainty");
  std::vector<PseudoLabel> labels(static_cast<std::size_t>(n));
  for (py::ssize_t i = 0; i < n; ++i) {
    auto& l = labels[static_cast<std::size_t>(i)];
    l.score = scores.at(i);
    l.uncertainty = uncertainty.at(i);
    // Row index rides in image_id so the sets map back to input rows.
    l.image_id = i;
  }
  const TargetSets sets = BuildTargetSets(labels, sigma_cls, sigma_unc);
  py::array_t<bool> cls(n), reg(n);
  auto c = cls.mutable_unchecked<1>();
  auto r = reg.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) c(i) = r(i) = false;
  for (const auto& l : sets.cls_targets) c(l.image_id) = true;
  for (const auto& l : sets.reg_targets) r(l.image_id) = true;
  return py::make_tuple(cls, reg);
}

F64 PyEmaUpdate(const F64& teacher, const F64& student, double rate) {
  if (teacher.ndim() != 1 || student.ndim() != 1) {
    throw InvalidArgumentError("parameters must be one-dimensional");
  }
  const ParamVector t(std::vector<double>(teacher.data(),
                                          teacher.data() + teacher.size()));
  const ParamVector s(std::vector<double>(student.data(),
                                          student.data() + student.size()));
  const ParamVector out = EmaUpdate(t, s, rate);
  F64 result(static_cast<py::ssize_t>(out.size()));
  std::copy(out.values().begin(), out.values().end(), result.mutable_data());
  return result;
}

}  // namespace
}  // namespace pslabel

PYBIND11_MODULE(_pslabel, m) {
  using namespace pslabel;
  m.doc() = "Native kernels for uncertainty-aware pseudo-label selection.";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object>
      error_type;
  error_type.call_once_and_store_result([&]() {
    return py::exception<Error>(m, "PslabelError", PyExc_RuntimeError);
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgumentError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(error_type.get_stored(), e.what());
    }
  });

  m.attr("DEFAULT_NMS_IOU_THRESHOLD") = kDefaultNmsIouThreshold;
  m.attr("DEFAULT_PSEUDO_LABEL_SCORE_THRESHOLD") =
      kDefaultPseudoLabelScoreThreshold;
  m.attr("DEFAULT_MATCH_IOU") = kDefaultMatchIou;
  m.attr("DEFAULT_CLASSIFICATION_THRESHOLD") = kDefaultClassificationThreshold;
  m.attr("DEFAULT_UNCERTAINTY_THRESHOLD") = kDefaultUncertaintyThreshold;
  m.attr("DEFAULT_EMA_RATE") = kDefaultEmaRate;
  m.attr("DEFAULT_UPDATE_PERIOD_ITERS") = kDefaultUpdatePeriodIters;

  m.def("nms_unc", &PyNmsUnc, py::arg("boxes"), py::arg("scores"),
        py::arg("classes") = py::none(), py::arg("image_ids") = py::none(),
        py::arg("centerness") = py::none(),
        py::arg("iou_thr") = kDefaultNmsIouThreshold,
        py::arg("score_thr") = kDefaultPseudoLabelScoreThreshold,
        py::arg("literal_index") = false,
        "Returns (boxes, scores, classes, image_ids, uncertainty, "
        "cluster_size, diagnostics).");
  m.def("standard_nms", &PyStandardNms, py::arg("boxes"), py::arg("scores"),
        py::arg("classes") = py::none(), py::arg("image_ids") = py::none(),
        py::arg("centerness") = py::none(),
        py::arg("iou_thr") = kDefaultNmsIouThreshold,
        py::arg("score_thr") = kDefaultInferenceScoreThreshold,
        "Returns (boxes, scores, classes, image_ids).");
  m.def("pr_curve", &PyPrCurve, py::arg("boxes"), py::arg("scores"),
        py::arg("classes") = py::none(), py::arg("image_ids") = py::none(),
        py::arg("gt_boxes"), py::arg("gt_classes") = py::none(),
        py::arg("gt_image_ids") = py::none(),
        py::arg("grid") = std::make_tuple(0.05, 0.95, 0.05),
        py::arg("match_iou") = kDefaultMatchIou, py::arg("strict") = false,
        "Returns a dict of per-threshold columns.");
  m.def("select_threshold", &PySelectThreshold, py::arg("thresholds"),
        py::arg("f1"), "Returns (threshold, peak_f1).");
  m.def("build_target_sets", &PyBuildTargetSets, py::arg("scores"),
        py::arg("uncertainty"),
        py::arg("sigma_cls") = kDefaultClassificationThreshold,
        py::arg("sigma_unc") = kDefaultUncertaintyThreshold,
        "Returns boolean masks (cls, reg) over the input rows.");
  m.def("ema_update", &PyEmaUpdate, py::arg("teacher"), py::arg("student"),
        py::arg("rate") = kDefaultEmaRate);
  m.def("cluster_uncertainty",
        [](const F64& boxes, bool literal_index) {
          CheckRows(boxes, "boxes");
          std::vector<BBox> c;
          const auto b = boxes.unchecked<2>();
          for (py::ssize_t i = 0; i < boxes.shape(0); ++i) {
            c.emplace_back(b(i, 0), b(i, 1), b(i, 2), b(i, 3));
          }
          return ClusterUncertainty(
              c, literal_index ? UncertaintyIndexing::kLiteralSum
                               : UncertaintyIndexing::kCornerAxis);
        },
        py::arg("boxes"), py::arg("literal_index") = false);
}
