"""Precision, recall, F1, PR curves, and (mean) average precision.

Two reporting regimes coexist: point metrics (precision/recall/F1) are
computed after cutting detections at a confidence threshold, while PR
curves and AP consume the full ranked detection list. AP uses all-point
interpolation: the area under the running-maximum precision envelope,
accumulated over distinct recall steps.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .annotations import DetectionRecord, GroundTruthRecord
from .errors import VruEvalError
from .matching import GreedyMatcher, match_class_image

__all__ = [
    "ConfusionCounts",
    "PRCurve",
    "precision",
    "recall",
    "f1",
    "confusion_at_threshold",
    "pr_curve",
    "average_precision",
    "mean_ap",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError(f"negative confusion count: {self}")

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def precision(counts: ConfusionCounts) -> float:
    """tp / (tp + fp); 0.0 by convention when nothing was predicted."""
    denom = counts.tp + counts.fp
    return counts.tp / denom if denom else 0.0


def recall(counts: ConfusionCounts) -> float:
    """tp / (tp + fn); 0.0 by convention when there are no positives."""
    denom = counts.tp + counts.fn
    return counts.tp / denom if denom else 0.0


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0.0 when both are 0."""
    return 2.0 * p * r / (p + r) if p + r else 0.0


def _group_by_image(records):
    grouped = defaultdict(list)
    for rec in records:
        grouped[rec.image_id].append(rec)
    return grouped


def _split_gts_for_class(gts, class_id):
    """Per-image ground truths of one class, plus class-agnostic ignores."""
    per_image = defaultdict(list)
    n_scorable = 0
    for gt in gts:
        if gt.ignore:
            per_image[gt.image_id].append(gt)
        elif gt.class_id == class_id:
            per_image[gt.image_id].append(gt)
            n_scorable += 1
    return per_image, n_scorable


def confusion_at_threshold(
    gts: list[GroundTruthRecord],
    dets: list[DetectionRecord],
    num_classes: int,
    iou_thresh: float,
    conf_thresh: float,
) -> dict[int, ConfusionCounts]:
    """Per-class TP/FP/FN with the confidence cut applied before matching."""
    kept = [d for d in dets if d.confidence >= conf_thresh]
    counts = {}
    for class_id in range(num_classes):
        gts_by_image, n_scorable = _split_gts_for_class(gts, class_id)
        dets_by_image = _group_by_image(d for d in kept if d.class_id == class_id)
        tp = fp = 0
        for image_id, image_dets in dets_by_image.items():
            outcomes = match_class_image(
                gts_by_image.get(image_id, []), image_dets, iou_thresh
            )
            tp += sum(o.is_tp for o in outcomes)
            fp += sum(o.is_fp for o in outcomes)
        counts[class_id] = ConfusionCounts(tp, fp, n_scorable - tp)
    return counts


@dataclass(frozen=True)
class PRCurve:
    """Cumulative (recall, precision) points along the ranked sweep."""

    class_id: int
    points: tuple[tuple[float, float], ...]
    n_positives: int


def pr_curve(
    gts: list[GroundTruthRecord],
    dets: list[DetectionRecord],
    class_id: int,
    iou_thresh: float,
) -> PRCurve:
    """Sweep the dataset-wide confidence ranking for one class.

    Detections are ranked across all images; each contributes one cumulative
    point unless it is suppressed by an ignore region.
    """
    gts_by_image, n_scorable = _split_gts_for_class(gts, class_id)
    class_dets = [d for d in dets if d.class_id == class_id]
    ranked = sorted(range(len(class_dets)), key=lambda i: (-class_dets[i].confidence, i))
    matchers = {
        image_id: GreedyMatcher(image_gts, iou_thresh)
        for image_id, image_gts in gts_by_image.items()
    }
    points = []
    tp = fp = 0
    for i in ranked:
        det = class_dets[i]
        matcher = matchers.get(det.image_id)
        if matcher is None:
            matcher = matchers[det.image_id] = GreedyMatcher([], iou_thresh)
        outcome = matcher.feed(det)
        if outcome.suppressed:
            continue
        if outcome.is_tp:
            tp += 1
        else:
            fp += 1
        r = tp / n_scorable if n_scorable else 0.0
        p = tp / (tp + fp)
        points.append((r, p))
    return PRCurve(class_id=class_id, points=tuple(points), n_positives=n_scorable)


def average_precision(curve: PRCurve) -> float | None:
    """All-point interpolated AP; None when the class has no positives.

    AP = sum over distinct recall steps of (r_i - r_{i-1}) times the
    maximum precision at recall >= r_i.
    """
    if curve.n_positives == 0:
        return None
    if not curve.points:
        return 0.0
    envelope = [0.0] * len(curve.points)
    running = 0.0
    for i in range(len(curve.points) - 1, -1, -1):
        running = max(running, curve.points[i][1])
        envelope[i] = running
    ap = 0.0
    prev_recall = 0.0
    for (r, _), env in zip(curve.points, envelope):
        if r > prev_recall:
            ap += (r - prev_recall) * env
            prev_recall = r
    return ap


def mean_ap(aps: dict[int, float | None]) -> tuple[float, list[int]]:
    """Mean over classes with a defined AP, plus the excluded class ids.

    Classes without ground-truth instances have no AP and do not count
    toward N; if every class is undefined there is nothing to average.
    """
    defined = {c: ap for c, ap in aps.items() if ap is not None}
    excluded = sorted(c for c, ap in aps.items() if ap is None)
    if not defined:
        raise VruEvalError("no scorable classes")
    return sum(defined.values()) / len(defined), excluded
