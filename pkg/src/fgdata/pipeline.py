"""Per-record and whole-dataset orchestration: detect, select, segment,
composite, flag.

Composited images keep the source dimensions and, under the mirror-source
policy, the source relative path and extension, so a foreground tree can
replace the source tree without touching downstream loaders. Background
pixels carry no information from the source: they are the configured fill
color, or fully transparent (RGBA zero) in transparent mode.
"""

from __future__ import annotations

import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import models, qa
from .images import ImageIOError, load_image, save_image
from .manifest import (
    DatasetManifest,
    Detection,
    FlagKind,
    ImageRecord,
    QAFlag,
    ReviewState,
    SegmentationMask,
)


class CompositeError(ValueError):
    pass


@dataclass(frozen=True)
class CompositeConfig:
    """fill is an opaque RGB triple, or None for transparent-alpha output
    (which forces PNG since the source format may not carry alpha)."""

    fill: Optional[tuple[int, int, int]] = (255, 255, 255)
    output_format_policy: str = "mirror-source"

    def __post_init__(self):
        if self.output_format_policy not in ("mirror-source", "force-png"):
            raise CompositeError(f"unknown output policy {self.output_format_policy!r}")
        if self.fill is None and self.output_format_policy != "force-png":
            raise CompositeError("transparent fill requires the force-png policy")
        if self.fill is not None and len(self.fill) != 3:
            raise CompositeError("fill must be an RGB triple or None")


@dataclass
class PipelineConfig:
    detector: models.DetectorConfig = field(default_factory=models.DetectorConfig)
    segmenter: models.SegmenterConfig = field(default_factory=models.SegmenterConfig)
    composite: CompositeConfig = field(default_factory=CompositeConfig)
    thresholds: qa.QAThresholds = field(default_factory=qa.QAThresholds)
    source_root: Path = Path(".")
    out_root: Path = Path("fg")
    config_digest: str = ""


@dataclass
class PipelineStats:
    processed: int = 0
    clean: int = 0
    flagged: int = 0
    per_flag: dict = field(default_factory=dict)
    wall_seconds: float = 0.0
    images_per_second: float = 0.0


def select_subject(
    detections: list[Detection], config: models.DetectorConfig
) -> tuple[Optional[Detection], bool]:
    """Pick the top-scoring detection; flag ambiguity when the runner-up is
    within the configured margin."""
    if not detections:
        return None, False
    chosen = detections[0]
    ambiguous = len(detections) > 1 and detections[1].score >= chosen.score - config.ambiguity_margin
    return chosen, ambiguous


def compose_foreground(
    image: np.ndarray, mask: SegmentationMask, config: CompositeConfig
) -> np.ndarray:
    """Keep mask=1 pixels bit-exact, replace mask=0 pixels with the fill (or
    alpha 0). Output dimensions always equal input dimensions."""
    image = np.asarray(image)
    if image.shape[:2] != (mask.height, mask.width):
        raise CompositeError(
            f"mask {mask.height}x{mask.width} does not match image {image.shape[:2]}"
        )
    fg = mask.to_array().astype(bool)
    if config.fill is None:
        out = np.zeros((mask.height, mask.width, 4), dtype=np.uint8)
        out[fg, :3] = image[fg]
        out[fg, 3] = 255
        return out
    out = np.empty_like(image)
    out[:] = np.array(config.fill, dtype=np.uint8)
    out[fg] = image[fg]
    return out


def fg_relative_path(source_path: str, config: CompositeConfig) -> str:
    if config.output_format_policy == "force-png":
        return str(Path(source_path).with_suffix(".png"))
    return source_path


def process_record(record: ImageRecord, config: PipelineConfig) -> ImageRecord:
    """Run one record through detect -> select -> segment -> composite.

    Never raises for record-level problems; failures surface as flags.
    Reprocessing a clean record with an identical config reproduces the same
    outputs byte for byte.
    """
    rec = replace(record, fg_path=None, detection=None, mask=None, flags=(), review=ReviewState.PENDING)
    try:
        image = load_image(config.source_root / record.source_path)
    except ImageIOError as exc:
        rec.flags = (QAFlag(FlagKind.NO_SUBJECT, f"processing error: {exc}"),)
        return rec

    detections = models.detect(image, config.detector)
    chosen, ambiguous = select_subject(detections, config.detector)
    rec.detection = chosen

    mask = None
    if chosen is not None:
        try:
            mask = models.segment(image, chosen.box, config.segmenter)
        except models.SegmentationFailure:
            mask = None
        rec.mask = mask

    rec.flags = qa.auto_flag(chosen, mask, config.thresholds, config.detector.vocabulary, ambiguous)

    if not rec.flags and mask is not None:
        rec.fg_path = fg_relative_path(record.source_path, config.composite)
        composite = compose_foreground(image.pixels, mask, config.composite)
        save_image(composite, config.out_root / rec.fg_path)
    return rec


def write_foreground(record: ImageRecord, config: PipelineConfig) -> str:
    """Composite and write the fg image for a record that already has a mask
    (used when a review decision releases a previously flagged record)."""
    if record.mask is None:
        raise CompositeError(f"record {record.record_id!r} has no mask to composite")
    image = load_image(config.source_root / record.source_path)
    rel = fg_relative_path(record.source_path, config.composite)
    save_image(compose_foreground(image.pixels, record.mask, config.composite), config.out_root / rel)
    return rel


def process_dataset(
    manifest: DatasetManifest, config: PipelineConfig, parallelism: int = 1
) -> tuple[DatasetManifest, PipelineStats]:
    """Process every record; the result is independent of the worker count."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    start = time.perf_counter()
    if parallelism == 1:
        out_records = [process_record(rec, config) for rec in manifest.records]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            out_records = list(pool.map(lambda r: process_record(r, config), manifest.records))
    wall = time.perf_counter() - start

    stats = PipelineStats(processed=len(out_records), wall_seconds=wall)
    for rec in out_records:
        if rec.clean:
            stats.clean += 1
        else:
            stats.flagged += 1
        for f in rec.flags:
            stats.per_flag[f.kind.value] = stats.per_flag.get(f.kind.value, 0) + 1
    stats.images_per_second = stats.processed / wall if wall > 0 else float("inf")

    fg_manifest = DatasetManifest(
        name=f"{manifest.name}_fg",
        kind=manifest.kind,
        classes=list(manifest.classes),
        records=out_records,
        provenance={"source": manifest.name, "config_digest": config.config_digest},
    )
    return fg_manifest, stats


def export_release(
    manifest: DatasetManifest, config: PipelineConfig, policy: str = "drop"
) -> DatasetManifest:
    """Materialize the release manifest.

    Records with a composited image are kept as-is. Unresolved or rejected
    records follow the policy: "drop" removes them, "keep-source" copies the
    untouched source image into the foreground tree.
    """
    if policy not in ("drop", "keep-source"):
        raise ValueError(f"unknown export policy {policy!r}")
    released = []
    for rec in manifest.records:
        if rec.fg_path is not None:
            released.append(replace(rec))
            continue
        if policy == "drop":
            continue
        dest = config.out_root / rec.source_path
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(config.source_root / rec.source_path, dest)
        released.append(replace(rec, fg_path=rec.source_path))
    return DatasetManifest(
        name=f"{manifest.name}_release",
        kind=manifest.kind,
        classes=list(manifest.classes),
        records=released,
        provenance={
            "source": manifest.name,
            "config_digest": config.config_digest,
            "export_policy": policy,
        },
    )
