"""Human review decisions: accept / reject / box re-prompt.

Every applied decision is appended to a JSONL log; manifest review state is
a pure fold over that log, so replaying it onto the pristine manifest
reproduces the current state exactly. A record takes exactly one terminal
decision (accept, reject, or a re-prompt that comes back clean); later
decisions hit a conflict error. A re-prompt that still trips the flagging
heuristics leaves the record pending with its new flags.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import models, qa
from .images import load_image
from .manifest import (
    BoundingBox,
    DatasetManifest,
    Detection,
    ImageRecord,
    ReviewState,
)
from .pipeline import PipelineConfig, fg_relative_path, write_foreground

ACTIONS = ("accept", "reject", "reprompt")


class RecordNotFound(KeyError):
    pass


class DecisionConflict(RuntimeError):
    pass


class DecisionInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ReviewDecision:
    record_id: str
    action: str
    manual_box: Optional[BoundingBox] = None
    reviewer: str = "anonymous"
    timestamp: str = ""

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise DecisionInvalid(f"action must be one of {ACTIONS}, got {self.action!r}")
        if self.action == "reprompt" and self.manual_box is None:
            raise DecisionInvalid("reprompt requires a manual_box")

    def to_obj(self) -> dict:
        return {
            "record_id": self.record_id,
            "action": self.action,
            "manual_box": self.manual_box.to_obj() if self.manual_box else None,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ReviewDecision":
        box = obj.get("manual_box")
        return ReviewDecision(
            record_id=str(obj["record_id"]),
            action=str(obj["action"]),
            manual_box=BoundingBox.from_obj(box) if box else None,
            reviewer=str(obj.get("reviewer", "anonymous")),
            timestamp=str(obj.get("timestamp", "")),
        )


def stamp(decision: ReviewDecision) -> ReviewDecision:
    if decision.timestamp:
        return decision
    return ReviewDecision(
        decision.record_id,
        decision.action,
        decision.manual_box,
        decision.reviewer,
        datetime.now(timezone.utc).isoformat(),
    )


def apply_decision(
    decision: ReviewDecision,
    manifest: DatasetManifest,
    config: PipelineConfig,
    write_images: bool = True,
) -> ImageRecord:
    """Apply one decision in place and return the updated record.

    Raises RecordNotFound for unknown ids and DecisionConflict when the
    record already took a terminal decision.
    """
    try:
        record = manifest.record_by_id(decision.record_id)
    except KeyError:
        raise RecordNotFound(decision.record_id) from None
    if record.review != ReviewState.PENDING:
        raise DecisionConflict(
            f"record {record.record_id!r} already {record.review.value}"
        )

    if decision.action == "accept":
        if record.mask is None:
            raise DecisionConflict(
                f"record {record.record_id!r} has no mask to accept; reprompt instead"
            )
        record.review = ReviewState.ACCEPTED
        record.fg_path = fg_relative_path(record.source_path, config.composite)
        if write_images:
            write_foreground(record, config)
        return record

    if decision.action == "reject":
        record.review = ReviewState.REJECTED
        record.fg_path = None
        return record

    # reprompt: re-run segmentation from the reviewer's box
    image = load_image(config.source_root / record.source_path)
    box = decision.manual_box.clamped(image.width, image.height)
    label = config.detector.vocabulary[0]
    record.detection = Detection(box, 1.0, label)
    try:
        record.mask = models.segment(image, box, config.segmenter)
    except models.SegmentationFailure:
        record.mask = None
    record.flags = qa.auto_flag(
        record.detection, record.mask, config.thresholds, config.detector.vocabulary
    )
    if record.flags:
        record.fg_path = None  # still pending with the recomputed flags
    else:
        record.review = ReviewState.CORRECTED
        record.fg_path = fg_relative_path(record.source_path, config.composite)
        if write_images:
            write_foreground(record, config)
    return record


class DecisionLog:
    """Append-only JSONL log of applied decisions; single writer."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, decision: ReviewDecision) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(decision.to_obj(), separators=(",", ":")) + "\n")

    def read_all(self) -> list[ReviewDecision]:
        if not self.path.exists():
            return []
        decisions = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    decisions.append(ReviewDecision.from_obj(json.loads(line)))
        return decisions


def replay_decisions(
    pristine: DatasetManifest,
    decisions: list[ReviewDecision],
    config: PipelineConfig,
    write_images: bool = False,
) -> DatasetManifest:
    """Fold the decision log over a copy of the pristine manifest."""
    manifest = pristine.copy()
    for decision in decisions:
        apply_decision(decision, manifest, config, write_images=write_images)
    return manifest
