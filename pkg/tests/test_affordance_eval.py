from __future__ import annotations

import itertools

import numpy as np
import pytest

from robodata.affordance_eval import (
    DEFAULT_THRESHOLDS,
    average_precision,
    iou,
    match_predictions,
    mean_ap,
)
from robodata.records import BoundingBox, PredictionRecord

from _oracles import staircase_ap


def _pred(item_id, box, conf):
    return PredictionRecord(item_id=item_id, task="affordance", payload=box, confidence=conf)


# -- IoU -----------------------------------------------------------------------

def test_iou_identity():
    b = BoundingBox(3, 4, 50, 60)
    assert iou(b, b) == 1.0


def test_iou_disjoint_and_touching():
    assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 30, 30)) == 0.0
    assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 20, 10)) == 0.0


def test_iou_one_seventh():
    value = iou(BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 15, 15))
    assert abs(value - 1 / 7) < 1e-12


def test_iou_symmetric():
    rng = np.random.default_rng(7)
    for _ in range(200):
        lx, rx = sorted(rng.choice(100, 2, replace=False).tolist())
        ly, ry = sorted(rng.choice(100, 2, replace=False).tolist())
        a = BoundingBox(int(lx), int(ly), int(rx), int(ry))
        lx, rx = sorted(rng.choice(100, 2, replace=False).tolist())
        ly, ry = sorted(rng.choice(100, 2, replace=False).tolist())
        b = BoundingBox(int(lx), int(ly), int(rx), int(ry))
        assert iou(a, b) == iou(b, a)
        assert 0.0 <= iou(a, b) <= 1.0


# -- matching ---------------------------------------------------------------------

def test_match_single_tp():
    gt = {"i": [BoundingBox(0, 0, 100, 100)]}
    matched = match_predictions([_pred("i", BoundingBox(0, 0, 100, 90), 0.9)], gt, 0.5)
    assert [m.tp for m in matched] == [True]


def test_match_higher_confidence_claims_first():
    gt = {"i": [BoundingBox(0, 0, 100, 100)]}
    preds = [
        _pred("i", BoundingBox(0, 0, 100, 95), 0.6),
        _pred("i", BoundingBox(0, 0, 100, 90), 0.9),
    ]
    matched = match_predictions(preds, gt, 0.5)
    assert [(m.prediction.confidence, m.tp) for m in matched] == [(0.9, True), (0.6, False)]


def test_match_zero_predictions():
    assert match_predictions([], {"i": [BoundingBox(0, 0, 10, 10)]}, 0.5) == []


def test_match_ties_break_deterministically():
    gt = {"a": [BoundingBox(0, 0, 100, 100)], "b": [BoundingBox(0, 0, 100, 100)]}
    preds = [
        _pred("b", BoundingBox(0, 0, 100, 100), 0.5),
        _pred("a", BoundingBox(0, 0, 100, 100), 0.5),
    ]
    m1 = match_predictions(preds, gt, 0.5)
    m2 = match_predictions(list(reversed(preds)), gt, 0.5)
    assert [m.prediction.item_id for m in m1] == ["a", "b"]
    assert m1 == m2


# -- average precision ---------------------------------------------------------------

def test_ap_perfect():
    assert average_precision([True, True], 2) == 1.0


def test_ap_tp_then_fp_over_one_gt():
    assert average_precision([True, False], 1) == 1.0


def test_ap_fp_then_tp_over_one_gt():
    assert abs(average_precision([False, True], 1) - 0.5) < 1e-12


def test_ap_empty_cases():
    assert average_precision([], 0) == 1.0
    assert average_precision([False], 0) == 0.0
    assert average_precision([], 3) == 0.0


def test_ap_matches_staircase_oracle_exhaustive():
    for n_gt in range(0, 4):
        for n_pred in range(0, 5):
            for flags in itertools.product([False, True], repeat=n_pred):
                if sum(flags) > n_gt:
                    continue  # impossible labeling
                assert average_precision(list(flags), n_gt) == pytest.approx(
                    staircase_ap(list(flags), n_gt), abs=1e-12
                )


def test_ap_interp_parameter():
    # 11-point interpolation of [FP, TP] over one GT: envelope is 0.5 everywhere
    assert abs(average_precision([False, True], 1, interp=11) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        average_precision([True], 1, interp=1)


# -- mean AP ---------------------------------------------------------------------------

def test_mean_ap_perfect_predictions():
    gt = {"i": [BoundingBox(0, 0, 100, 100)]}
    result = mean_ap([_pred("i", BoundingBox(0, 0, 100, 100), 0.9)], gt)
    assert result.mean == 1.0
    assert all(v == 1.0 for _, v in result.per_threshold)


def test_mean_ap_exact_point_six_iou():
    # IoU exactly 0.60: passes thresholds 0.50, 0.55, 0.60 of the default ten
    gt_box = BoundingBox(0, 0, 100, 60)
    pred_box = BoundingBox(0, 0, 100, 100)
    assert iou(pred_box, gt_box) == 0.6
    result = mean_ap([_pred("i", pred_box, 0.9)], {"i": [gt_box]})
    assert abs(result.mean - 0.3) < 1e-12
    passing = [v for _, v in result.per_threshold]
    assert passing == [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]


def test_mean_ap_is_mean_of_thresholds():
    rng = np.random.default_rng(23)
    for _ in range(50):
        gt = {}
        preds = []
        for i in range(int(rng.integers(1, 4))):
            item = f"it{i}"
            gt[item] = [BoundingBox(0, 0, int(rng.integers(10, 500)), int(rng.integers(10, 500)))]
            for _ in range(int(rng.integers(0, 3))):
                preds.append(
                    _pred(
                        item,
                        BoundingBox(0, 0, int(rng.integers(10, 500)), int(rng.integers(10, 500))),
                        float(rng.integers(101)) / 100,
                    )
                )
        result = mean_ap(preds, gt, DEFAULT_THRESHOLDS)
        values = [v for _, v in result.per_threshold]
        assert result.mean == pytest.approx(sum(values) / len(values), abs=1e-15)
        assert values == sorted(values, reverse=True)  # non-increasing in threshold


def test_mean_ap_confidence_rescaling_invariant():
    gt = {"i": [BoundingBox(0, 0, 100, 100), BoundingBox(200, 200, 300, 300)]}
    preds = [
        _pred("i", BoundingBox(0, 0, 100, 95), 0.9),
        _pred("i", BoundingBox(200, 200, 300, 290), 0.4),
        _pred("i", BoundingBox(500, 500, 600, 600), 0.2),
    ]
    rescaled = [
        PredictionRecord(
            item_id=p.item_id, task="affordance", payload=p.payload, confidence=p.confidence / 2
        )
        for p in preds
    ]
    assert mean_ap(preds, gt) == mean_ap(rescaled, gt)


def test_mean_ap_requires_thresholds():
    with pytest.raises(ValueError):
        mean_ap([], {}, thresholds=())
