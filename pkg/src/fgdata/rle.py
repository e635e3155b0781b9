"""Run-length codec for binary masks.

Masks are scanned column-major (COCO uncompressed convention) and stored as
alternating run lengths starting with a background run. A leading 0 expresses
a mask whose first pixel is foreground. Interior runs are always positive.
"""

from __future__ import annotations

import numpy as np


class RleError(ValueError):
    """Raised for inputs that violate the codec contract."""


def rle_encode(mask: np.ndarray) -> list[int]:
    """Encode a binary HxW mask into column-major run-length counts.

    The first count covers background (value 0); counts alternate 0/1 runs.
    Raises RleError if the mask is not 2-D with entries in {0, 1}.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise RleError(f"mask must be 2-D, got shape {mask.shape}")
    if mask.size == 0:
        raise RleError("mask must be non-empty")
    vals = np.unique(mask)
    if not np.all(np.isin(vals, (0, 1))):
        raise RleError(f"mask entries must be 0 or 1, found {vals.tolist()[:8]}")

    flat = mask.ravel(order="F").astype(np.uint8)
    # indices where the value changes; runs are the gaps between them
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    counts = np.diff(bounds).tolist()
    if flat[0] == 1:
        counts.insert(0, 0)
    return [int(c) for c in counts]


def rle_decode(counts: list[int], height: int, width: int) -> np.ndarray:
    """Decode run-length counts back into a uint8 HxW mask.

    Exact inverse of rle_encode. Raises RleError when the counts do not sum
    to height*width, contain negatives, or contain an interior zero run.
    """
    if height <= 0 or width <= 0:
        raise RleError(f"invalid mask size {height}x{width}")
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise RleError("run lengths must be non-negative")
    if any(c == 0 for c in counts[1:]):
        raise RleError("zero-length run only permitted in leading position")
    total = sum(counts)
    if total != height * width:
        raise RleError(f"counts sum to {total}, expected {height * width}")

    flat = np.zeros(total, dtype=np.uint8)
    pos = 0
    val = 0
    for c in counts:
        if val:
            flat[pos : pos + c] = 1
        pos += c
        val ^= 1
    return flat.reshape((height, width), order="F")


def mask_area(counts: list[int]) -> int:
    """Foreground pixel count straight from the run lengths."""
    return int(sum(counts[1::2]))
