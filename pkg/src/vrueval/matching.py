"""Greedy detection-to-ground-truth matching for one image and class.

Protocol: detections are processed in strictly descending confidence
(ties broken by ascending input order). Each detection claims the
still-unmatched, non-ignored ground truth with the highest IoU, provided
that IoU meets the threshold; IoU ties go to the lowest ground-truth
index. A detection that cannot claim a ground truth but overlaps an
ignore region at or above the threshold is suppressed -- neither TP nor
FP. Everything else is a false positive, and unmatched non-ignored
ground truths are false negatives.
"""

from __future__ import annotations

from dataclasses import dataclass

from .annotations import DetectionRecord, GroundTruthRecord
from .errors import ContractError
from .geometry import iou

__all__ = ["MatchOutcome", "match_class_image", "GreedyMatcher"]


@dataclass(frozen=True)
class MatchOutcome:
    """Fate of one detection. ``suppressed`` marks ignore-region overlap."""

    detection: DetectionRecord
    matched: GroundTruthRecord | None
    iou: float
    suppressed: bool = False

    @property
    def is_tp(self) -> bool:
        return self.matched is not None

    @property
    def is_fp(self) -> bool:
        return self.matched is None and not self.suppressed


class GreedyMatcher:
    """Incremental matcher holding the consumed-ground-truth state.

    Feed detections in descending confidence; each ``feed`` call returns
    that detection's MatchOutcome. Used directly for PR-curve sweeps where
    detections arrive in a dataset-wide ranking.
    """

    def __init__(self, gts: list[GroundTruthRecord], iou_thresh: float):
        if not 0.0 < iou_thresh <= 1.0:
            raise ContractError(f"iou threshold {iou_thresh} outside (0, 1]")
        self.scorable = [g for g in gts if not g.ignore]
        self.ignored = [g for g in gts if g.ignore]
        self.iou_thresh = iou_thresh
        self._taken = [False] * len(self.scorable)

    def feed(self, det: DetectionRecord) -> MatchOutcome:
        best_iou = 0.0
        best_idx = -1
        for idx, gt in enumerate(self.scorable):
            if self._taken[idx]:
                continue
            overlap = iou(det.box, gt.box)
            if overlap > best_iou:  # strict: IoU ties keep the lowest index
                best_iou = overlap
                best_idx = idx
        if best_idx >= 0 and best_iou >= self.iou_thresh:
            self._taken[best_idx] = True
            return MatchOutcome(det, self.scorable[best_idx], best_iou)
        ignore_iou = max((iou(det.box, g.box) for g in self.ignored), default=0.0)
        if ignore_iou >= self.iou_thresh:
            return MatchOutcome(det, None, ignore_iou, suppressed=True)
        return MatchOutcome(det, None, best_iou)

    @property
    def unmatched_count(self) -> int:
        return self._taken.count(False)


def _check_same_image_class(gts, dets):
    image_ids = {g.image_id for g in gts} | {d.image_id for d in dets}
    if len(image_ids) > 1:
        raise ContractError(f"records span multiple images: {sorted(image_ids)}")
    class_ids = {g.class_id for g in gts if not g.ignore} | {d.class_id for d in dets}
    if len(class_ids) > 1:
        raise ContractError(f"records span multiple classes: {sorted(class_ids)}")


def match_class_image(
    gts: list[GroundTruthRecord],
    dets: list[DetectionRecord],
    iou_thresh: float,
) -> list[MatchOutcome]:
    """Match one image's detections of one class; outcomes in ranked order.

    Ignore records in ``gts`` are class-agnostic and may appear regardless
    of the class being matched; all other records must share one image and
    one class.
    """
    _check_same_image_class(gts, dets)
    matcher = GreedyMatcher(gts, iou_thresh)
    ranked = sorted(range(len(dets)), key=lambda i: (-dets[i].confidence, i))
    return [matcher.feed(dets[i]) for i in ranked]
