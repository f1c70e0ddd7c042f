"""Affordance detection scoring: IoU, greedy matching, interpolated AP.

Average precision follows the 101-point interpolation protocol: the
precision envelope p(r) = max{precision at recall >= r} is sampled at
recalls 0.00, 0.01, ..., 1.00 and averaged.  Matching is greedy in
descending confidence with deterministic tie-breaks, one claim per
ground-truth box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .records import BoundingBox, PredictionRecord, ValidationError

# 0.50, 0.55, ..., 0.95 built from integer hundredths so threshold
# values compare exactly against IoU ratios like 60/100
DEFAULT_THRESHOLDS = tuple(i / 100 for i in range(50, 96, 5))

DEFAULT_INTERP_POINTS = 101


def _recall_grid(interp: int) -> np.ndarray:
    if type(interp) is not int or interp < 2:
        raise ValueError(f"interp must be an integer >= 2, got {interp!r}")
    return np.arange(interp) / (interp - 1)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0.0 when they merely touch."""
    iw = min(a.rx, b.rx) - max(a.lx, b.lx)
    ih = min(a.ry, b.ry) - max(a.ly, b.ly)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class MatchedPrediction:
    """One prediction after matching, in evaluation (sorted) order."""

    prediction: PredictionRecord
    tp: bool
    iou: float
    gt_index: int  # index into the item's ground-truth list, -1 for FP


def _sort_key(pred: PredictionRecord):
    box = pred.payload
    box_bytes = json.dumps(
        {"lx": box.lx, "ly": box.ly, "rx": box.rx, "ry": box.ry}, separators=(",", ":")
    )
    return (-pred.confidence, pred.item_id, box_bytes)


def match_predictions(
    predictions: Sequence[PredictionRecord],
    ground_truth: Mapping[str, Sequence[BoundingBox]],
    iou_threshold: float,
) -> list[MatchedPrediction]:
    """Greedy confidence-ordered matching against per-item ground truth.

    Ties in confidence break by item_id, then by serialized box bytes.
    Each ground-truth box is claimable once; a prediction matches the
    highest-IoU unclaimed box of its item when that IoU clears the
    threshold, otherwise it is a false positive.
    """
    for p in predictions:
        if p.task != "affordance":
            raise ValidationError("task", f"expected affordance predictions, got {p.task!r}")
    ordered = sorted(predictions, key=_sort_key)
    claimed: dict[str, set[int]] = {}
    out: list[MatchedPrediction] = []
    for pred in ordered:
        gts = ground_truth.get(pred.item_id, ())
        taken = claimed.setdefault(pred.item_id, set())
        best_iou = 0.0
        best_idx = -1
        for gi, gt in enumerate(gts):
            if gi in taken:
                continue
            value = iou(pred.payload, gt)
            if value > best_iou:
                best_iou = value
                best_idx = gi
        if best_idx >= 0 and best_iou >= iou_threshold:
            taken.add(best_idx)
            out.append(MatchedPrediction(pred, True, best_iou, best_idx))
        else:
            out.append(MatchedPrediction(pred, False, best_iou, -1))
    return out


def average_precision(tp_flags: Sequence[bool], n_gt: int, interp: int = DEFAULT_INTERP_POINTS) -> float:
    """Interpolated AP from confidence-ordered TP/FP flags.

    The precision envelope is sampled at ``interp`` evenly spaced
    recall points (101 by convention).  With no ground truth the score
    is 1.0 for an empty prediction list (nothing to find, nothing
    claimed) and 0.0 otherwise.
    """
    grid = _recall_grid(interp)
    if n_gt < 0:
        raise ValueError("n_gt must be non-negative")
    if n_gt == 0:
        return 1.0 if len(tp_flags) == 0 else 0.0
    if len(tp_flags) == 0:
        return 0.0
    flags = np.asarray(tp_flags, dtype=bool)
    tp = np.cumsum(flags)
    fp = np.cumsum(~flags)
    recall = tp / n_gt
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    first_at = np.searchsorted(recall, grid, side="left")
    reachable = first_at < len(recall)
    sampled = np.where(reachable, envelope[np.minimum(first_at, len(recall) - 1)], 0.0)
    return float(sampled.sum() / len(grid))


@dataclass(frozen=True)
class ApResult:
    """AP per IoU threshold plus their arithmetic mean."""

    per_threshold: tuple[tuple[float, float], ...]
    mean: float

    def as_dict(self) -> dict[str, float]:
        # repr keys round-trip exactly through float(), so a report's
        # aggregates can be recomputed from its own keys
        return {repr(t): v for t, v in self.per_threshold}


def mean_ap(
    predictions: Sequence[PredictionRecord],
    ground_truth: Mapping[str, Sequence[BoundingBox]],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    counts: Optional[Mapping[str, int]] = None,
    interp: int = DEFAULT_INTERP_POINTS,
) -> ApResult:
    """AP at each IoU threshold and the mean over thresholds.

    ``counts`` overrides the per-item ground-truth count (defaults to
    the lengths of ``ground_truth`` values).
    """
    if not thresholds:
        raise ValueError("at least one IoU threshold is required")
    if counts is not None:
        n_gt = sum(counts.values())
    else:
        n_gt = sum(len(v) for v in ground_truth.values())
    per: list[tuple[float, float]] = []
    for thr in thresholds:
        matched = match_predictions(predictions, ground_truth, thr)
        per.append((float(thr), average_precision([m.tp for m in matched], n_gt, interp)))
    mean = sum(v for _, v in per) / len(per)
    return ApResult(per_threshold=tuple(per), mean=mean)

