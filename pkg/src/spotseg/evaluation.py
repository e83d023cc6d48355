"""Pixel-level evaluation against ground truth.

The confusion matrix is column-normalized per ground-truth class: x11 is the
percentage of true background segmented as background, x22 the percentage of
true foreground segmented as foreground, with x21/x12 their complements.  The
headline score of a segmentation is (x11 + x22) / 2.  When a ground-truth
class is empty its column percentages are undefined (NaN) and such samples
are excluded from aggregates, with the exclusion counted.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .image import as_mask

# overlay colors, per comparison outcome
COLOR_FN = (255, 0, 0)      # ground truth only: missed spots, red
COLOR_TP = (255, 255, 0)    # in both: yellow
COLOR_FP = (0, 255, 0)      # segmentation only: green
COLOR_TN = (0, 0, 0)        # neither: black

#: column order of the per-image metrics CSV
CSV_FIELDS = [
    "image_id", "tn", "fn", "fp", "tp",
    "x11", "x12", "x21", "x22",
    "precision", "recall", "fmeasure", "performance",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts plus column-normalized percentages; NaN marks an undefined column."""

    tn: int
    fn: int
    fp: int
    tp: int
    x11: float
    x12: float
    x21: float
    x22: float

    @property
    def background_defined(self) -> bool:
        return not math.isnan(self.x11)

    @property
    def foreground_defined(self) -> bool:
        return not math.isnan(self.x22)

    @property
    def total(self) -> int:
        return self.tn + self.fn + self.fp + self.tp


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    fmeasure: float


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    median: float
    stddev: float
    count: int
    excluded: int


def _check_pair(gt: np.ndarray, seg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gt = as_mask(gt)
    seg = as_mask(seg)
    if gt.shape != seg.shape:
        raise ValueError(f"mask shapes differ: gt {gt.shape} vs seg {seg.shape}")
    return gt, seg


def confusion(gt: np.ndarray, seg: np.ndarray) -> ConfusionMatrix:
    """Count tn/fn/fp/tp pixelwise and derive the column percentages."""
    gt, seg = _check_pair(gt, seg)
    tp = int(np.count_nonzero(gt & seg))
    fn = int(np.count_nonzero(gt & ~seg))
    fp = int(np.count_nonzero(~gt & seg))
    tn = int(np.count_nonzero(~gt & ~seg))
    bg = tn + fp
    fg = tp + fn
    x11 = 100.0 * tn / bg if bg > 0 else float("nan")
    x21 = 100.0 * fp / bg if bg > 0 else float("nan")
    x22 = 100.0 * tp / fg if fg > 0 else float("nan")
    x12 = 100.0 * fn / fg if fg > 0 else float("nan")
    return ConfusionMatrix(tn=tn, fn=fn, fp=fp, tp=tp, x11=x11, x12=x12, x21=x21, x22=x22)


def performance(cm: ConfusionMatrix) -> float:
    """Correct-segmentation score (x11 + x22) / 2, in [0, 100]."""
    if not (cm.background_defined and cm.foreground_defined):
        raise ValueError("performance undefined: a ground-truth class is empty")
    return (cm.x11 + cm.x22) / 2.0


def classical_metrics(gt: np.ndarray, seg: np.ndarray) -> Metrics:
    """Precision, recall and f-measure from the pixel counts."""
    cm = confusion(gt, seg)
    return metrics_from_counts(cm)


def metrics_from_counts(cm: ConfusionMatrix) -> Metrics:
    """Derive Metrics from an existing ConfusionMatrix.

    Degenerate conventions: an empty segmentation of an empty ground truth is
    a perfect match (precision = recall = 1); an empty segmentation of a
    nonempty ground truth scores 0.
    """
    if cm.tp + cm.fp == 0:
        precision = 1.0 if cm.fn == 0 else 0.0
    else:
        precision = cm.tp / (cm.tp + cm.fp)
    if cm.tp + cm.fn == 0:
        recall = 1.0 if cm.fp == 0 else 0.0
    else:
        recall = cm.tp / (cm.tp + cm.fn)
    if precision + recall > 0:
        fmeasure = 2.0 * precision * recall / (precision + recall)
    else:
        fmeasure = 0.0
    return Metrics(precision=precision, recall=recall, fmeasure=fmeasure)


def overlay(gt: np.ndarray, seg: np.ndarray) -> np.ndarray:
    """Render the comparison image: red = missed, yellow = hit, green = extra."""
    gt, seg = _check_pair(gt, seg)
    out = np.zeros((*gt.shape, 3), dtype=np.uint8)
    out[gt & ~seg] = COLOR_FN
    out[gt & seg] = COLOR_TP
    out[~gt & seg] = COLOR_FP
    return out


def _summary(values: list[float]) -> MetricSummary:
    arr = np.asarray(values, dtype=np.float64)
    finite = arr[np.isfinite(arr)]
    excluded = arr.size - finite.size
    if finite.size == 0:
        return MetricSummary(float("nan"), float("nan"), float("nan"), 0, excluded)
    return MetricSummary(
        mean=float(finite.mean()),
        median=float(np.median(finite)),
        stddev=float(finite.std(ddof=0)),
        count=int(finite.size),
        excluded=excluded,
    )


def aggregate(samples: list[ConfusionMatrix]) -> dict[str, MetricSummary]:
    """Mean, median and population stddev per cell and derived metric.

    Samples with an undefined column drop out of the statistics that need it;
    the exclusion count is reported per metric.
    """
    if not samples:
        raise ValueError("aggregate needs at least one confusion matrix")
    perfs = [
        (cm.x11 + cm.x22) / 2.0
        if cm.background_defined and cm.foreground_defined else float("nan")
        for cm in samples
    ]
    derived = [metrics_from_counts(cm) for cm in samples]
    columns: dict[str, list[float]] = {
        "x11": [cm.x11 for cm in samples],
        "x12": [cm.x12 for cm in samples],
        "x21": [cm.x21 for cm in samples],
        "x22": [cm.x22 for cm in samples],
        "performance": perfs,
        "precision": [m.precision for m in derived],
        "recall": [m.recall for m in derived],
        "fmeasure": [m.fmeasure for m in derived],
    }
    return {name: _summary(vals) for name, vals in columns.items()}


def _csv_value(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def metrics_row(image_id: str, cm: ConfusionMatrix) -> dict:
    """One CSV row of counts, percentages and derived metrics for an image."""
    m = metrics_from_counts(cm)
    perf = (cm.x11 + cm.x22) / 2.0 \
        if cm.background_defined and cm.foreground_defined else float("nan")
    return {
        "image_id": image_id,
        "tn": cm.tn, "fn": cm.fn, "fp": cm.fp, "tp": cm.tp,
        "x11": cm.x11, "x12": cm.x12, "x21": cm.x21, "x22": cm.x22,
        "precision": m.precision, "recall": m.recall, "fmeasure": m.fmeasure,
        "performance": perf,
    }


def write_metrics_csv(rows: list[dict], path: str | os.PathLike) -> None:
    """Write per-image metric rows; NaN cells are left empty."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_FIELDS)
        for row in rows:
            writer.writerow([_csv_value(row[k]) for k in CSV_FIELDS])


def summary_document(stats: dict[str, MetricSummary]) -> dict:
    """JSON-ready summary: mean/median/stddev plus sample bookkeeping per metric."""
    return {
        name: {
            "mean": None if math.isnan(s.mean) else s.mean,
            "median": None if math.isnan(s.median) else s.median,
            "stddev": None if math.isnan(s.stddev) else s.stddev,
            "count": s.count,
            "excluded": s.excluded,
        }
        for name, s in stats.items()
    }


def write_summary_json(stats: dict[str, MetricSummary], path: str | os.PathLike) -> None:
    with open(path, "w") as f:
        json.dump(summary_document(stats), f, indent=2, sort_keys=True)
        f.write("\n")
