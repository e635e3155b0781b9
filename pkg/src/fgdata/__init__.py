"""Foreground-only dataset engineering for fine-grained categorization."""

from .manifest import (
    BoundingBox,
    DatasetManifest,
    Detection,
    FlagKind,
    ImageRecord,
    QAFlag,
    ReviewState,
    SegmentationMask,
    load_manifest,
    save_manifest,
)
from .rle import rle_decode, rle_encode

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "DatasetManifest",
    "Detection",
    "FlagKind",
    "ImageRecord",
    "QAFlag",
    "ReviewState",
    "SegmentationMask",
    "load_manifest",
    "save_manifest",
    "rle_decode",
    "rle_encode",
    "__version__",
]
