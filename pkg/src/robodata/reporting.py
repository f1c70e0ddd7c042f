"""Evaluation drivers and deterministic report assembly.

A report is a single JSON document: task, created_at, the resolved
config, corpus aggregates, and a per-item section sorted by item_id.
Per-item entries carry enough information to recompute every
aggregate, and ``verify_report`` does exactly that recomputation, so a
report can be audited without the original prediction files.

Join keys (ground-truth corpora do not all carry an explicit id):
trajectory items join on ``episode_id``; affordance items join on
``image_ref + "::" + prompt``; planning items join on
``instance_id + "#" + question_type + "#" + template_id``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, Union

from .affordance_eval import DEFAULT_INTERP_POINTS, DEFAULT_THRESHOLDS, iou, mean_ap
from .planning_eval import PairStats, pair_stats, score_from_stats
from .records import (
    AffordanceSample,
    BoundingBox,
    PredictionRecord,
    QAPair,
    Trajectory,
    ValidationError,
    record_to_obj,
)
from .trajectory_metrics import DEFAULT_RESAMPLE_POINTS, scale_to_unit, score_pair


def affordance_item_key(sample: AffordanceSample) -> str:
    return f"{sample.image_ref}::{sample.prompt}"


def planning_item_key(pair: QAPair) -> str:
    return f"{pair.instance_id}#{pair.question_type}#{pair.template_id}"


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _check_join(pred_ids: Iterable[str], gt_ids: Iterable[str], what: str) -> None:
    preds = list(pred_ids)
    seen: set[str] = set()
    for i in preds:
        if i in seen:
            raise ValidationError("item_id", f"duplicate prediction item_id {i!r}")
        seen.add(i)
    pred_set, gt_set = seen, set(gt_ids)
    missing_gt = pred_set - gt_set
    if missing_gt:
        raise ValidationError("item_id", f"no {what} ground truth for item {sorted(missing_gt)[0]!r}")
    missing_pred = gt_set - pred_set
    if missing_pred:
        raise ValidationError("item_id", f"no prediction for {what} item {sorted(missing_pred)[0]!r}")


# ---------------------------------------------------------------------------
# drivers

def evaluate_trajectories(
    predictions: Sequence[PredictionRecord],
    ground_truth: Sequence[Trajectory],
    rmse_k: int = DEFAULT_RESAMPLE_POINTS,
    jobs: int = 1,
) -> tuple[dict, list[dict]]:
    """Per-item Frechet/Hausdorff/RMSE in unit space, plus corpus means."""
    for p in predictions:
        if p.task != "trajectory":
            raise ValidationError("task", f"expected trajectory predictions, got {p.task!r}")
    gt_by_id = {}
    for t in ground_truth:
        if t.episode_id in gt_by_id:
            raise ValidationError("episode_id", f"duplicate ground-truth episode {t.episode_id!r}")
        gt_by_id[t.episode_id] = t
    _check_join([p.item_id for p in predictions], gt_by_id, "trajectory")

    def one(pred: PredictionRecord) -> dict:
        target = gt_by_id[pred.item_id]
        score = score_pair(scale_to_unit(pred.payload), scale_to_unit(target), rmse_k)
        return {"item_id": pred.item_id, "dfd": score.dfd, "hd": score.hd, "rmse": score.rmse}

    per_item = sorted(_map(one, list(predictions), jobs), key=lambda e: e["item_id"])
    n = len(per_item)
    aggregates = {
        "dfd": sum(e["dfd"] for e in per_item) / n if n else 0.0,
        "hd": sum(e["hd"] for e in per_item) / n if n else 0.0,
        "rmse": sum(e["rmse"] for e in per_item) / n if n else 0.0,
        "n_items": n,
    }
    return aggregates, per_item


def evaluate_affordance(
    predictions: Sequence[PredictionRecord],
    ground_truth: Sequence[AffordanceSample],
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    interp: int = DEFAULT_INTERP_POINTS,
    jobs: int = 1,
) -> tuple[dict, list[dict]]:
    """Corpus AP over IoU thresholds; per-item sections carry the raw
    boxes so the aggregates can be recomputed from the report alone."""
    for p in predictions:
        if p.task != "affordance":
            raise ValidationError("task", f"expected affordance predictions, got {p.task!r}")
    gt_boxes: dict[str, list[BoundingBox]] = {}
    for sample in ground_truth:
        gt_boxes.setdefault(affordance_item_key(sample), []).append(sample.box)
    unknown = {p.item_id for p in predictions} - set(gt_boxes)
    if unknown:
        raise ValidationError("item_id", f"no affordance ground truth for item {sorted(unknown)[0]!r}")

    result = mean_ap(predictions, gt_boxes, thresholds, interp=interp)

    preds_by_item: dict[str, list[PredictionRecord]] = {}
    for p in predictions:
        preds_by_item.setdefault(p.item_id, []).append(p)

    def one(item_id: str) -> dict:
        boxes = gt_boxes[item_id]
        entries = []
        for p in preds_by_item.get(item_id, ()):
            best = max((iou(p.payload, g) for g in boxes), default=0.0)
            entries.append(
                {"box": record_to_obj(p.payload), "confidence": p.confidence, "max_iou": best}
            )
        return {
            "item_id": item_id,
            "n_gt": len(boxes),
            "n_pred": len(entries),
            "gt_boxes": [record_to_obj(b) for b in boxes],
            "predictions": entries,
        }

    item_ids = sorted(gt_boxes)
    per_item = _map(one, item_ids, jobs)
    aggregates = {
        "ap": result.as_dict(),
        "mean_ap": result.mean,
        "n_items": len(item_ids),
        "n_predictions": len(predictions),
        "n_gt": sum(len(v) for v in gt_boxes.values()),
    }
    return aggregates, per_item


def evaluate_planning(
    predictions: Sequence[PredictionRecord],
    ground_truth: Sequence[QAPair],
    orders: Sequence[int] = (1, 2, 3, 4),
    smooth: Optional[str] = None,
    jobs: int = 1,
) -> tuple[dict, list[dict]]:
    """Corpus BLEU at the requested orders for predicted answers."""
    orders = sorted(set(orders))
    if not orders:
        raise ValidationError("orders", "at least one BLEU order is required")
    for n in orders:
        if type(n) is not int or not 1 <= n <= 4:
            raise ValidationError("orders", f"BLEU orders must be integers in 1..4, got {n!r}")
    max_n = orders[-1]
    for p in predictions:
        if p.task != "planning":
            raise ValidationError("task", f"expected planning predictions, got {p.task!r}")
    refs_by_id: dict[str, QAPair] = {}
    for qa in ground_truth:
        key = planning_item_key(qa)
        if key in refs_by_id:
            raise ValidationError("instance_id", f"duplicate ground-truth item {key!r}")
        refs_by_id[key] = qa
    _check_join([p.item_id for p in predictions], refs_by_id, "planning")

    def one(pred: PredictionRecord) -> tuple[str, PairStats]:
        qa = refs_by_id[pred.item_id]
        return pred.item_id, pair_stats(pred.payload, [qa.answer], max_n)

    stats = _map(one, list(predictions), jobs)
    stats.sort(key=lambda pair: pair[0])
    per_item = []
    for item_id, st in stats:
        per_item.append(
            {
                "item_id": item_id,
                "cand_len": st.cand_len,
                "ref_len": st.ref_len,
                "clipped": {str(k + 1): [st.clipped[k], st.total[k]] for k in range(max_n)},
                "bleu": {str(n): score_from_stats([st], n, smooth) for n in orders},
            }
        )
    all_stats = [st for _, st in stats]
    aggregates = {
        "bleu": {
            str(n): (score_from_stats(all_stats, n, smooth) if all_stats else 0.0)
            for n in orders
        },
        "judge_score": None,  # reserved; no scorer ships
        "n_items": len(per_item),
    }
    return aggregates, per_item


# ---------------------------------------------------------------------------
# report document

def build_report(
    task: str,
    config: dict,
    aggregates: dict,
    per_item: list[dict],
    created_at: Optional[str] = None,
) -> dict:
    """Assemble the report document (per_item sorted by item_id)."""
    return {
        "task": task,
        "created_at": created_at if created_at is not None else utc_timestamp(),
        "config": {k: config[k] for k in sorted(config)},
        "aggregates": aggregates,
        "per_item": sorted(per_item, key=lambda e: e["item_id"]),
    }


def render_report(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def write_report(report: dict, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_report(report))


def _expect(name: str, got, want) -> None:
    if got != want:
        raise ValidationError("aggregates", f"aggregate {name!r} does not match per_item recomputation")


def verify_report(report: dict) -> None:
    """Recompute every aggregate from the per_item section; raise on drift."""
    task = report["task"]
    agg = report["aggregates"]
    per_item = report["per_item"]
    ids = [e["item_id"] for e in per_item]
    if ids != sorted(ids):
        raise ValidationError("per_item", "per_item entries are not sorted by item_id")
    if task == "trajectory":
        n = len(per_item)
        _expect("n_items", agg["n_items"], n)
        for key in ("dfd", "hd", "rmse"):
            want = sum(e[key] for e in per_item) / n if n else 0.0
            _expect(key, agg[key], want)
    elif task == "affordance":
        preds, gt = [], {}
        for entry in per_item:
            gt[entry["item_id"]] = [BoundingBox(**b) for b in entry["gt_boxes"]]
            if entry["n_gt"] != len(entry["gt_boxes"]) or entry["n_pred"] != len(entry["predictions"]):
                raise ValidationError("per_item", "per_item counts disagree with listed boxes")
            for p in entry["predictions"]:
                preds.append(
                    PredictionRecord(
                        item_id=entry["item_id"],
                        task="affordance",
                        payload=BoundingBox(**p["box"]),
                        confidence=p["confidence"],
                    )
                )
        thresholds = [float(k) for k in agg["ap"]]
        interp = report.get("config", {}).get("interp", DEFAULT_INTERP_POINTS)
        result = mean_ap(preds, gt, thresholds, interp=interp)
        _expect("ap", agg["ap"], result.as_dict())
        _expect("mean_ap", agg["mean_ap"], result.mean)
        _expect("n_items", agg["n_items"], len(per_item))
        _expect("n_predictions", agg["n_predictions"], len(preds))
        _expect("n_gt", agg["n_gt"], sum(len(v) for v in gt.values()))
    elif task == "planning":
        smooth = report.get("config", {}).get("smooth")
        orders = sorted(int(k) for k in agg["bleu"])
        max_n = max(orders) if orders else 0
        stats = []
        for entry in per_item:
            clipped = tuple(entry["clipped"][str(k)][0] for k in range(1, max_n + 1))
            total = tuple(entry["clipped"][str(k)][1] for k in range(1, max_n + 1))
            stats.append(PairStats(clipped, total, entry["cand_len"], entry["ref_len"]))
        for n in orders:
            want = score_from_stats(stats, n, smooth) if stats else 0.0
            _expect(f"bleu.{n}", agg["bleu"][str(n)], want)
        _expect("n_items", agg["n_items"], len(per_item))
    else:
        raise ValidationError("task", f"unknown report task {task!r}")


def summary_table(report: dict) -> str:
    """Small aligned table of the aggregates, for terminal output."""
    agg = report["aggregates"]
    rows: list[tuple[str, str]] = []
    if report["task"] == "trajectory":
        for key in ("dfd", "hd", "rmse"):
            rows.append((key, f"{agg[key]:.6f}"))
        rows.append(("items", str(agg["n_items"])))
    elif report["task"] == "affordance":
        for thr, val in agg["ap"].items():
            rows.append((f"ap@{thr}", f"{val:.4f}"))
        rows.append(("mean_ap", f"{agg['mean_ap']:.4f}"))
        rows.append(("items", str(agg["n_items"])))
    else:
        for n, val in agg["bleu"].items():
            rows.append((f"bleu-{n}", f"{val:.4f}"))
        rows.append(("items", str(agg["n_items"])))
    width = max(len(name) for name, _ in rows)
    lines = [f"{name.ljust(width)}  {value}" for name, value in rows]
    header = f"{report['task']} evaluation ({report['created_at']})"
    return "\n".join([header, "-" * len(header)] + lines)
