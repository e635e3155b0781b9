"""Dataset manifests: records, boxes, masks, flags, and JSONL persistence.

A manifest file is line-delimited JSON: the first line holds dataset-level
metadata (name, kind, classes, provenance), each following line is one record
with exactly the fields record_id, class_id, class_name, split, source_path,
fg_path, detection, mask, flags, review. Foreground datasets keep the source
relative paths so they can drop-in replace the originals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .rle import mask_area, rle_decode, rle_encode

SPLITS = ("train", "test")


class ManifestError(ValueError):
    """Raised for structurally invalid manifests or manifest files."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box: (x, y) is the top-left corner."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ManifestError(f"box must have positive size, got {self}")
        if self.x < 0 or self.y < 0:
            raise ManifestError(f"box origin must be non-negative, got {self}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def validate_in(self, width: int, height: int) -> None:
        """Check the box lies within an image of the given size."""
        if self.x + self.w > width or self.y + self.h > height:
            raise ManifestError(
                f"box {self} exceeds image bounds {width}x{height}"
            )

    def clamped(self, width: int, height: int) -> "BoundingBox":
        """Clip the box to image bounds, keeping at least one pixel."""
        x = min(max(self.x, 0), width - 1)
        y = min(max(self.y, 0), height - 1)
        w = max(1, min(self.w, width - x))
        h = max(1, min(self.h, height - y))
        return BoundingBox(x, y, w, h)

    def to_obj(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @staticmethod
    def from_obj(obj: dict) -> "BoundingBox":
        return BoundingBox(int(obj["x"]), int(obj["y"]), int(obj["w"]), int(obj["h"]))


@dataclass(frozen=True)
class SegmentationMask:
    """Binary foreground mask stored as column-major run-length counts."""

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self):
        total = sum(self.counts)
        if total != self.height * self.width:
            raise ManifestError(
                f"mask counts sum to {total}, expected {self.height * self.width}"
            )
        if any(c < 0 for c in self.counts):
            raise ManifestError("mask run lengths must be non-negative")
        if any(c == 0 for c in self.counts[1:]):
            raise ManifestError("interior zero-length run in mask counts")

    @staticmethod
    def from_array(mask: np.ndarray) -> "SegmentationMask":
        h, w = mask.shape
        return SegmentationMask(int(h), int(w), tuple(rle_encode(mask)))

    def to_array(self) -> np.ndarray:
        return rle_decode(list(self.counts), self.height, self.width)

    @property
    def area(self) -> int:
        return mask_area(list(self.counts))

    def to_obj(self) -> dict:
        return {"height": self.height, "width": self.width, "counts": list(self.counts)}

    @staticmethod
    def from_obj(obj: dict) -> "SegmentationMask":
        return SegmentationMask(
            int(obj["height"]), int(obj["width"]), tuple(int(c) for c in obj["counts"])
        )


@dataclass(frozen=True)
class Detection:
    """One detector hit: box, confidence in [0, 1], query label."""

    box: BoundingBox
    score: float
    label: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ManifestError(f"detection score {self.score} outside [0, 1]")

    def to_obj(self) -> dict:
        return {"box": self.box.to_obj(), "score": self.score, "label": self.label}

    @staticmethod
    def from_obj(obj: dict) -> "Detection":
        return Detection(BoundingBox.from_obj(obj["box"]), float(obj["score"]), str(obj["label"]))


class FlagKind(str, Enum):
    """Automatic failure categories: the four observed failure modes plus an
    ambiguity marker for ties between competing detections."""

    NO_SUBJECT = "NO_SUBJECT"
    WRONG_SUBJECT = "WRONG_SUBJECT"
    UNWANTED_BACKGROUND = "UNWANTED_BACKGROUND"
    INCOMPLETE_OBJECT = "INCOMPLETE_OBJECT"
    AMBIGUOUS = "AMBIGUOUS"


@dataclass(frozen=True)
class QAFlag:
    kind: FlagKind
    detail: str = ""
    metric: Optional[float] = None

    def to_obj(self) -> dict:
        obj: dict = {"kind": self.kind.value, "detail": self.detail}
        if self.metric is not None:
            obj["metric"] = self.metric
        return obj

    @staticmethod
    def from_obj(obj: dict) -> "QAFlag":
        metric = obj.get("metric")
        return QAFlag(
            FlagKind(obj["kind"]),
            str(obj.get("detail", "")),
            float(metric) if metric is not None else None,
        )


class ReviewState(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    CORRECTED = "corrected"


RECORD_FIELDS = (
    "record_id",
    "class_id",
    "class_name",
    "split",
    "source_path",
    "fg_path",
    "detection",
    "mask",
    "flags",
    "review",
)


@dataclass
class ImageRecord:
    """One dataset sample with its pipeline and review state."""

    record_id: str
    class_id: int
    class_name: str
    split: str
    source_path: str
    fg_path: Optional[str] = None
    detection: Optional[Detection] = None
    mask: Optional[SegmentationMask] = None
    flags: tuple[QAFlag, ...] = ()
    review: ReviewState = ReviewState.PENDING

    def __post_init__(self):
        if self.class_id < 0:
            raise ManifestError(f"class_id must be >= 0, got {self.class_id}")
        if self.split not in SPLITS:
            raise ManifestError(f"split must be one of {SPLITS}, got {self.split!r}")
        # deterministic flag order regardless of how callers assembled them
        self.flags = tuple(sorted(set(self.flags), key=lambda f: (f.kind.value, f.detail)))

    @property
    def clean(self) -> bool:
        return len(self.flags) == 0

    def flag_kinds(self) -> set[FlagKind]:
        return {f.kind for f in self.flags}

    def to_obj(self) -> dict:
        return {
            "record_id": self.record_id,
            "class_id": self.class_id,
            "class_name": self.class_name,
            "split": self.split,
            "source_path": self.source_path,
            "fg_path": self.fg_path,
            "detection": self.detection.to_obj() if self.detection else None,
            "mask": self.mask.to_obj() if self.mask else None,
            "flags": [f.to_obj() for f in self.flags],
            "review": self.review.value,
        }

    @staticmethod
    def from_obj(obj: dict) -> "ImageRecord":
        missing = [k for k in RECORD_FIELDS if k not in obj]
        if missing:
            raise ManifestError(f"record missing fields {missing}")
        return ImageRecord(
            record_id=str(obj["record_id"]),
            class_id=int(obj["class_id"]),
            class_name=str(obj["class_name"]),
            split=str(obj["split"]),
            source_path=str(obj["source_path"]),
            fg_path=obj["fg_path"],
            detection=Detection.from_obj(obj["detection"]) if obj["detection"] else None,
            mask=SegmentationMask.from_obj(obj["mask"]) if obj["mask"] else None,
            flags=tuple(QAFlag.from_obj(f) for f in obj["flags"]),
            review=ReviewState(obj["review"]),
        )


DATASET_KINDS = ("cub", "cars", "aircraft", "generic")


@dataclass
class DatasetManifest:
    """Ordered record collection plus the class list and provenance."""

    name: str
    kind: str
    classes: list[str]
    records: list[ImageRecord] = field(default_factory=list)
    provenance: dict = field(default_factory=lambda: {"source": "original"})

    def __post_init__(self):
        if self.kind not in DATASET_KINDS:
            raise ManifestError(f"unknown dataset kind {self.kind!r}")
        self.validate()

    def validate(self) -> None:
        seen: set[str] = set()
        for rec in self.records:
            if rec.record_id in seen:
                raise ManifestError(f"duplicate record_id {rec.record_id!r}")
            seen.add(rec.record_id)
            if rec.class_id >= len(self.classes):
                raise ManifestError(
                    f"record {rec.record_id!r} has class_id {rec.class_id} "
                    f"but manifest has {len(self.classes)} classes"
                )

    def __len__(self) -> int:
        return len(self.records)

    def record_by_id(self, record_id: str) -> ImageRecord:
        for rec in self.records:
            if rec.record_id == record_id:
                return rec
        raise KeyError(record_id)

    def subset(self, split: Optional[str] = None) -> list[ImageRecord]:
        if split is None or split == "all":
            return list(self.records)
        return [r for r in self.records if r.split == split]

    def copy(self) -> "DatasetManifest":
        return DatasetManifest(
            name=self.name,
            kind=self.kind,
            classes=list(self.classes),
            records=[replace(r) for r in self.records],
            provenance=dict(self.provenance),
        )


def _header_obj(manifest: DatasetManifest) -> dict:
    return {
        "name": manifest.name,
        "kind": manifest.kind,
        "classes": manifest.classes,
        "provenance": manifest.provenance,
    }


def manifest_to_lines(manifest: DatasetManifest) -> Iterable[str]:
    yield json.dumps(_header_obj(manifest), separators=(",", ":"))
    for rec in manifest.records:
        yield json.dumps(rec.to_obj(), separators=(",", ":"))


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in manifest_to_lines(manifest):
            fh.write(line + "\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest file not found: {path}")
    records: list[ImageRecord] = []
    header: Optional[dict] = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}:{lineno}: malformed line: {exc}") from exc
            if lineno == 1:
                if not isinstance(obj, dict) or "classes" not in obj:
                    raise ManifestError(f"{path}:1: missing manifest header line")
                header = obj
                continue
            try:
                records.append(ImageRecord.from_obj(obj))
            except (ManifestError, KeyError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: bad record: {exc}") from exc
    if header is None:
        raise ManifestError(f"{path}: empty manifest file")
    return DatasetManifest(
        name=str(header["name"]),
        kind=str(header["kind"]),
        classes=[str(c) for c in header["classes"]],
        records=records,
        provenance=dict(header.get("provenance", {})),
    )
