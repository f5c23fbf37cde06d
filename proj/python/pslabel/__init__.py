# Copyright 2026 The pslabel Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Uncertainty-aware pseudo-label selection for single-stage detectors.

Boxes are (N, 4) float64 arrays of corners x1, y1, x2, y2. Optional per-row
columns carry class ids, image ids and centerness. Every function delegates
to the native core, so results are bit-identical to the command line tool.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Tuple

import numpy as np

from . import _pslabel
from ._pslabel import PslabelError

__all__ = [
    "BoxArray",
    "PslabelError",
    "build_target_sets",
    "cluster_uncertainty",
    "ema_update",
    "nms_unc",
    "pr_curve",
    "select_threshold",
    "standard_nms",
]

DEFAULT_NMS_IOU_THRESHOLD = _pslabel.DEFAULT_NMS_IOU_THRESHOLD
DEFAULT_PSEUDO_LABEL_SCORE_THRESHOLD = _pslabel.DEFAULT_PSEUDO_LABEL_SCORE_THRESHOLD
DEFAULT_MATCH_IOU = _pslabel.DEFAULT_MATCH_IOU
DEFAULT_CLASSIFICATION_THRESHOLD = _pslabel.DEFAULT_CLASSIFICATION_THRESHOLD
DEFAULT_UNCERTAINTY_THRESHOLD = _pslabel.DEFAULT_UNCERTAINTY_THRESHOLD
DEFAULT_EMA_RATE = _pslabel.DEFAULT_EMA_RATE
DEFAULT_UPDATE_PERIOD_ITERS = _pslabel.DEFAULT_UPDATE_PERIOD_ITERS


@dataclasses.dataclass
class BoxArray:
    """Corner boxes with parallel score, class, image and centerness columns."""

    boxes: np.ndarray
    scores: np.ndarray
    classes: Optional[np.ndarray] = None
    image_ids: Optional[np.ndarray] = None
    centerness: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(np.shape(self.boxes)[0])


def _as_box_array(boxes, scores=None, classes=None, image_ids=None,
                  centerness=None) -> BoxArray:
    if isinstance(boxes, BoxArray):
        return boxes
    boxes = np.asarray(boxes, dtype=np.float64)
    if boxes.size == 0:
        boxes = boxes.reshape(0, 4)
    if scores is None:
        raise ValueError("scores are required when boxes is not a BoxArray")
    return BoxArray(boxes, np.asarray(scores, dtype=np.float64), classes,
                    image_ids, centerness)


def nms_unc(boxes, scores=None, classes=None, image_ids=None, centerness=None,
            *, iou_thr: float = DEFAULT_NMS_IOU_THRESHOLD,
            score_thr: float = DEFAULT_PSEUDO_LABEL_SCORE_THRESHOLD,
            literal_index: bool = False, return_diagnostics: bool = False):
    """Pseudo labels with regression uncertainty.

    Returns (kept BoxArray, uncertainty, cluster_size), plus a diagnostics
    dict when return_diagnostics is set.
    """
    b = _as_box_array(boxes, scores, classes, image_ids, centerness)
    kb, ks, kc, ki, unc, size, diag = _pslabel.nms_unc(
        b.boxes, b.scores, b.classes, b.image_ids, b.centerness,
        iou_thr=iou_thr, score_thr=score_thr, literal_index=literal_index)
    kept = BoxArray(kb, ks, kc, ki)
    if return_diagnostics:
        return kept, unc, size, diag
    return kept, unc, size


def standard_nms(boxes, scores=None, classes=None, image_ids=None,
                 centerness=None, *,
                 iou_thr: float = DEFAULT_NMS_IOU_THRESHOLD,
                 score_thr: float = 0.05) -> BoxArray:
    """Greedy per-class NMS."""
    b = _as_box_array(boxes, scores, classes, image_ids, centerness)
    kb, ks, kc, ki = _pslabel.standard_nms(
        b.boxes, b.scores, b.classes, b.image_ids, b.centerness,
        iou_thr=iou_thr, score_thr=score_thr)
    return BoxArray(kb, ks, kc, ki)


def pr_curve(detections: BoxArray, gt_boxes, gt_classes=None,
             gt_image_ids=None, *,
             grid: Tuple[float, float, float] = (0.05, 0.95, 0.05),
             match_iou: float = DEFAULT_MATCH_IOU,
             strict: bool = False) -> dict:
    """Precision, recall and F1 columns over an inclusive threshold grid."""
    d = _as_box_array(detections)
    gt = np.asarray(gt_boxes, dtype=np.float64)
    if gt.size == 0:
        gt = gt.reshape(0, 4)
    return _pslabel.pr_curve(d.boxes, d.scores, d.classes, d.image_ids,
                             gt_boxes=gt, gt_classes=gt_classes,
                             gt_image_ids=gt_image_ids, grid=tuple(grid),
                             match_iou=match_iou, strict=strict)


def select_threshold(thresholds, f1=None) -> Tuple[float, float]:
    """Grid threshold of maximal F1; ties go to the highest threshold.

    Accepts either two columns or a dict returned by pr_curve.
    """
    if isinstance(thresholds, dict):
        return _pslabel.select_threshold(thresholds["threshold"],
                                         thresholds["f1"])
    return _pslabel.select_threshold(thresholds, f1)


def build_target_sets(scores, uncertainty,
                      sigma_cls: float = DEFAULT_CLASSIFICATION_THRESHOLD,
                      sigma_unc: float = DEFAULT_UNCERTAINTY_THRESHOLD):
    """Boolean masks (score >= sigma_cls, uncertainty < sigma_unc)."""
    return _pslabel.build_target_sets(scores, uncertainty, sigma_cls,
                                      sigma_unc)


def ema_update(teacher, student, rate: float = DEFAULT_EMA_RATE) -> np.ndarray:
    """rate * teacher + (1 - rate) * student, element-wise."""
    return _pslabel.ema_update(teacher, student, rate)


def cluster_uncertainty(boxes, literal_index: bool = False) -> float:
    """Normalized corner dispersion of a cluster of two or more boxes."""
    return _pslabel.cluster_uncertainty(np.asarray(boxes, dtype=np.float64),
                                        literal_index)
