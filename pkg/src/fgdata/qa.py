"""Automatic failure flagging and the review queue.

The detector/segmenter stack fails in four recognizable ways: no subject
found, the wrong subject found, too much background kept, or only part of
the object kept. auto_flag pre-selects candidates for human review with
cheap geometric heuristics; the thresholds are engineering defaults tuned on
the synthetic corpus, recorded in run provenance, and are not claims about
any particular detector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy import ndimage

from .manifest import (
    DatasetManifest,
    Detection,
    FlagKind,
    ImageRecord,
    QAFlag,
    ReviewState,
    SegmentationMask,
)

FOUR_CONNECTED = [[0, 1, 0], [1, 1, 1], [0, 1, 0]]


@dataclass(frozen=True)
class QAThresholds:
    max_mask_to_box_ratio: float = 1.5
    min_mask_to_box_ratio: float = 0.25
    max_border_contact_fraction: float = 0.4
    max_components: int = 3

    def __post_init__(self):
        if not 0 < self.min_mask_to_box_ratio < self.max_mask_to_box_ratio:
            raise ValueError("need 0 < min_mask_to_box_ratio < max_mask_to_box_ratio")


def border_contact_fraction(mask: np.ndarray) -> float:
    """Fraction of the image border occupied by foreground."""
    h, w = mask.shape
    border = np.concatenate([mask[0, :], mask[-1, :], mask[1:-1, 0], mask[1:-1, -1]])
    return float(border.sum()) / border.size


def count_components(mask: np.ndarray) -> int:
    _, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    return int(n)


def auto_flag(
    detection: Optional[Detection],
    mask: Optional[SegmentationMask],
    thresholds: QAThresholds,
    vocabulary: Iterable[str],
    ambiguous: bool = False,
) -> tuple[QAFlag, ...]:
    """Pure flagging function over one record's pipeline outputs."""
    if detection is None:
        return (QAFlag(FlagKind.NO_SUBJECT, "no detection above threshold"),)

    flags: list[QAFlag] = []
    if detection.label not in set(vocabulary):
        flags.append(
            QAFlag(FlagKind.WRONG_SUBJECT, f"label {detection.label!r} outside vocabulary")
        )
    if ambiguous:
        flags.append(QAFlag(FlagKind.AMBIGUOUS, "competing detection within margin"))

    if mask is None:
        flags.append(QAFlag(FlagKind.INCOMPLETE_OBJECT, "segmentation produced no mask"))
        return tuple(flags)

    arr = mask.to_array()
    ratio = mask.area / detection.box.area
    contact = border_contact_fraction(arr)
    if ratio > thresholds.max_mask_to_box_ratio:
        flags.append(
            QAFlag(FlagKind.UNWANTED_BACKGROUND, "mask far larger than its box", ratio)
        )
    elif contact > thresholds.max_border_contact_fraction:
        flags.append(
            QAFlag(FlagKind.UNWANTED_BACKGROUND, "mask hugs the image border", contact)
        )
    n_components = count_components(arr)
    if ratio < thresholds.min_mask_to_box_ratio:
        flags.append(
            QAFlag(FlagKind.INCOMPLETE_OBJECT, "mask far smaller than its box", ratio)
        )
    elif n_components > thresholds.max_components:
        flags.append(
            QAFlag(FlagKind.INCOMPLETE_OBJECT, "mask fragmented", float(n_components))
        )
    return tuple(flags)


def enqueue_flagged(manifest: DatasetManifest) -> list[ImageRecord]:
    """Pending flagged records in manifest (FIFO) order. Idempotent."""
    return [
        rec
        for rec in manifest.records
        if rec.flags and rec.review == ReviewState.PENDING
    ]


def flag_counts(manifest: DatasetManifest) -> dict[str, int]:
    counts = {kind.value: 0 for kind in FlagKind}
    for rec in manifest.records:
        for f in rec.flags:
            counts[f.kind.value] += 1
    return counts
