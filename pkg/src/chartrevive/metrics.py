"""Detection-style evaluation: IOU, all-points AP, AP50/AP75 and mAP@[.50:.95]."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .svg import Rect

THRESHOLDS = tuple(round(0.5 + 0.05 * k, 2) for k in range(10))


@dataclass(frozen=True)
class Detection:
    chart_id: str
    bbox: Rect
    class_id: int
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class GroundTruthBox:
    chart_id: str
    bbox: Rect
    class_id: int


def iou(a: Rect, b: Rect) -> float:
    ix = max(0.0, min(a.x2, b.x2) - max(a.x, b.x))
    iy = max(0.0, min(a.y2, b.y2) - max(a.y, b.y))
    inter = ix * iy
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return inter / union


def _box_key(r: Rect):
    return (r.x, r.y, r.w, r.h)


def _match(dets: Sequence[Detection], gts: Sequence[GroundTruthBox], class_id: int,
           thr: float) -> tuple[list[bool], int]:
    """Greedy matching; returns TP flags in ranked order and the GT count."""
    cls_gts = [g for g in gts if g.class_id == class_id]
    ranked = sorted((d for d in dets if d.class_id == class_id),
                    key=lambda d: (-d.confidence, d.chart_id, _box_key(d.bbox)))
    by_chart: dict[str, list[int]] = {}
    for k, g in enumerate(cls_gts):
        by_chart.setdefault(g.chart_id, []).append(k)
    used = [False] * len(cls_gts)
    flags = []
    for d in ranked:
        best, best_iou = None, thr
        for k in by_chart.get(d.chart_id, ()):
            if used[k]:
                continue
            v = iou(d.bbox, cls_gts[k].bbox)
            if v >= best_iou and (best is None or v > best_iou):
                best, best_iou = k, v
        if best is None:
            flags.append(False)
        else:
            used[best] = True
            flags.append(True)
    return flags, len(cls_gts)


def ap_from_flags(flags: Sequence[bool], n_gt: int) -> float:
    """All-points interpolated area under the precision envelope."""
    if n_gt == 0:
        return float("nan")
    if not flags:
        return 0.0
    tp = np.cumsum(np.asarray(flags, dtype=float))
    fp = np.cumsum(1.0 - np.asarray(flags, dtype=float))
    recall = np.concatenate([[0.0], tp / n_gt, [1.0]])
    precision = np.concatenate([[0.0], tp / (tp + fp), [0.0]])
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.nonzero(recall[1:] != recall[:-1])[0]
    return float(np.sum((recall[idx + 1] - recall[idx]) * precision[idx + 1]))


def average_precision(dets, gts, class_id: int, iou_threshold: float) -> Optional[float]:
    """AP for one class; None when the class has no ground truth."""
    flags, n = _match(dets, gts, class_id, iou_threshold)
    if n == 0:
        return None
    return ap_from_flags(flags, n)


def _mean(values) -> float:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else 0.0


def per_class_ap(dets, gts, thresholds=THRESHOLDS) -> dict[int, dict[float, Optional[float]]]:
    classes = sorted({g.class_id for g in gts} | {d.class_id for d in dets})
    return {c: {t: average_precision(dets, gts, c, t) for t in thresholds} for c in classes}


def map_over_thresholds(dets, gts) -> dict[str, float]:
    table = per_class_ap(dets, gts)
    per_t = {t: _mean(table[c][t] for c in table) for t in THRESHOLDS}
    return {"ap50": per_t[0.5], "ap75": per_t[0.75], "map": float(np.mean(list(per_t.values())))}


def eval_report(dets, gts, class_names: Sequence[str]) -> dict:
    """``{per_class: {name: {ap50, ap75, map}}, overall: {...}, counts}``."""
    table = per_class_ap(dets, gts)
    per_class = {}
    for c, aps in table.items():
        if all(v is None for v in aps.values()):
            continue
        per_class[class_names[c]] = {"ap50": aps[0.5], "ap75": aps[0.75],
                                     "map": float(np.mean([aps[t] for t in THRESHOLDS]))}
    counts = {"detections": len(dets), "ground_truth": len(gts),
              "charts": len({g.chart_id for g in gts})}
    return {"per_class": per_class, "overall": map_over_thresholds(dets, gts), "counts": counts}


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)


def format_table(rows: dict[str, dict]) -> str:
    """Plain-text AP50 / AP75 / mAP table, one row per encoder configuration."""
    lines = [f"{'encoder':<12}{'AP50':>8}{'AP75':>8}{'mAP':>8}"]
    for name, r in rows.items():
        lines.append(f"{name:<12}{100 * r['ap50']:8.1f}{100 * r['ap75']:8.1f}{100 * r['map']:8.1f}")
    return "\n".join(lines)
