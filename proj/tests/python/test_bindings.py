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

"""Smoke and parity tests for the Python extension."""

import json
import os
import pathlib
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

import pslabel

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
CLI = os.environ.get("PSLABEL_CLI")

A = [0.0, 0.0, 10.0, 10.0]
B = [1.0, 1.0, 11.0, 11.0]
C = [40.0, 40.0, 50.0, 50.0]


def test_three_box_fixture():
    start = time.perf_counter()
    kept, unc, size = pslabel.nms_unc(np.array([A, B, C]),
                                      np.array([0.9, 0.8, 0.7]))
    assert time.perf_counter() - start < 5.0
    assert len(kept) == 1
    np.testing.assert_array_equal(kept.boxes, [A])
    assert kept.scores[0] == 0.9
    assert abs(unc[0] - 0.05) <= 1e-9
    assert size[0] == 2


def test_two_box_diagnostics():
    kept, unc, size, diag = pslabel.nms_unc(
        np.array([A, C]), np.array([0.9, 0.7]), return_diagnostics=True)
    assert len(kept) == 0
    assert diag == {"clusters": 2, "singleton_drops": 2, "degenerate_drops": 0}


def test_empty_input():
    kept, unc, size = pslabel.nms_unc(np.zeros((0, 4)), np.zeros(0))
    assert kept.boxes.shape == (0, 4)
    assert unc.shape == (0,) and size.shape == (0,)
    assert len(pslabel.standard_nms(np.zeros((0, 4)), np.zeros(0))) == 0


def test_shape_mismatch_raises_with_core_message():
    with pytest.raises(ValueError, match="scores"):
        pslabel.nms_unc(np.array([A, B]), np.array([0.9]))
    with pytest.raises(ValueError, match=r"\(N, 4\)"):
        pslabel.nms_unc(np.zeros((2, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        pslabel.nms_unc(np.array([[5.0, 0.0, 1.0, 1.0]]), np.array([0.5]))


def test_standard_nms_and_centerness():
    kept = pslabel.standard_nms(np.array([A, B, C]),
                                np.array([0.9, 0.8, 0.7]), iou_thr=0.6)
    np.testing.assert_array_equal(kept.boxes, [A, C])
    kept = pslabel.standard_nms(np.array([A]), np.array([0.8]),
                                centerness=np.array([0.5]))
    assert abs(kept.scores[0] - 0.4) < 1e-15


def test_pr_curve_and_select_threshold():
    gts = np.array([A, C])
    dets = pslabel.BoxArray(gts.copy(), np.array([1.0, 1.0]))
    curve = pslabel.pr_curve(dets, gts)
    assert curve["threshold"].shape == (19,)
    assert np.all(curve["f1"] == 1.0)
    assert pslabel.select_threshold(curve) == (0.95, 1.0)
    assert pslabel.select_threshold([0.4, 0.5, 0.6], [0.2, 0.5, 0.3]) == (0.5,
                                                                         0.5)
    with pytest.raises(ValueError):
        pslabel.select_threshold([], [])


def test_build_target_sets():
    cls, reg = pslabel.build_target_sets([0.9, 0.3, 0.9, 0.9],
                                         [0.02, 0.02, 0.08, 0.10])
    assert cls.tolist() == [True, False, True, True]
    assert reg.tolist() == [True, True, False, False]


def test_ema_update():
    np.testing.assert_allclose(pslabel.ema_update([1.0], [0.0]), [0.999],
                               rtol=0, atol=1e-15)
    t0 = np.array([1.0, -2.0, 5.0])
    s = np.array([0.0, 3.0, 5.0])
    t = t0
    for _ in range(10):
        t = pslabel.ema_update(t, s, 0.999)
    rk = 0.999 ** 10
    np.testing.assert_allclose(t, rk * t0 + (1 - rk) * s, rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        pslabel.ema_update([1.0], [1.0, 2.0])


def test_cluster_uncertainty():
    assert pslabel.cluster_uncertainty([A, [2.0, 0.0, 12.0, 10.0]]) == \
        pytest.approx(0.05, abs=1e-15)
    with pytest.raises(pslabel.PslabelError):
        pslabel.cluster_uncertainty([[0, 0, 0, 5], [1, 0, 1, 5]])


def _random_scene(rng):
    n = int(rng.integers(0, 60))
    anchors = rng.integers(0, 200, size=(6, 2)) * 0.5
    pick = rng.integers(0, 6, size=n)
    xy = anchors[pick] + rng.integers(-6, 7, size=(n, 2)) * 0.5
    wh = rng.integers(16, 60, size=(n, 2)) * 0.5
    boxes = np.concatenate([xy, xy + wh], axis=1)
    scores = rng.integers(0, 21, size=n) / 20.0
    classes = rng.integers(1, 3, size=n)
    images = rng.integers(1, 3, size=n)
    return boxes, scores, classes, images


@pytest.mark.skipif(not CLI, reason="PSLABEL_CLI not set")
def test_cli_parity_on_seeded_scenes():
    rng = np.random.default_rng(1234)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for scene in range(100):
            boxes, scores, classes, images = _random_scene(rng)
            records = [{
                "image_id": int(images[i]),
                "category_id": int(classes[i]),
                "bbox": [boxes[i, 0], boxes[i, 1], boxes[i, 2] - boxes[i, 0],
                         boxes[i, 3] - boxes[i, 1]],
                "score": float(scores[i]),
            } for i in range(len(scores))]
            det_path = tmp / "dets.json"
            out_path = tmp / "labels.json"
            det_path.write_text(json.dumps(records))
            subprocess.run([CLI, "nms-unc", "--detections", str(det_path),
                            "--out", str(out_path)], check=True)
            cli = json.loads(out_path.read_text())
            kept, unc, size = pslabel.nms_unc(boxes, scores, classes, images)
            assert len(cli) == len(kept), scene
            for i, rec in enumerate(cli):
                x, y, w, h = rec["bbox"]
                assert [x, y, x + w, y + h] == kept.boxes[i].tolist()
                assert rec["score"] == kept.scores[i]
                assert rec["uncertainty"] == unc[i]
                assert rec["cluster_size"] == size[i]
                assert rec["category_id"] == kept.classes[i]
                assert rec["image_id"] == kept.image_ids[i]


@pytest.mark.skipif(not CLI, reason="PSLABEL_CLI not set")
def test_cli_fixture_matches_binding():
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "labels.json"
        subprocess.run([CLI, "nms-unc", "--detections",
                        str(DATA / "three_box_detections.json"), "--out",
                        str(out)], check=True)
        labels = json.loads(out.read_text())
    assert len(labels) == 1
    _, unc, _ = pslabel.nms_unc(np.array([A, B, C]), np.array([0.9, 0.8, 0.7]))
    assert labels[0]["uncertainty"] == unc[0]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
