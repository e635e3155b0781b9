"""Image loading/saving and the fixture sidecar convention.

Rasters are HxWx3 uint8 RGB arrays. A Raster keeps the source path around so
stub backends can locate the image's ground-truth sidecar (`<stem>.gt.json`
next to the image), which carries detections and an optional segmentation
mode for failure injection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image


class ImageIOError(RuntimeError):
    pass


@dataclass
class Raster:
    pixels: np.ndarray  # HxWx3 uint8
    path: Optional[Path] = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ImageIOError(f"expected HxWx3 RGB array, got shape {px.shape}")
        self.pixels = px.astype(np.uint8, copy=False)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def load_image(path: str | Path) -> Raster:
    path = Path(path)
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot read image {path}: {exc}") from exc
    return Raster(arr, path=path)


def save_image(pixels: np.ndarray, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if pixels.ndim == 3 and pixels.shape[2] == 4:
        Image.fromarray(pixels, mode="RGBA").save(path)
    else:
        Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path)


def sidecar_path(image_path: Path) -> Path:
    return image_path.with_suffix(image_path.suffix + ".gt.json")


def read_sidecar(image_path: Optional[Path]) -> Optional[dict]:
    """Ground-truth sidecar for a fixture image, or None when absent."""
    if image_path is None:
        return None
    sc = sidecar_path(Path(image_path))
    if not sc.exists():
        return None
    with open(sc, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_sidecar(image_path: Path, obj: dict) -> None:
    sc = sidecar_path(Path(image_path))
    with open(sc, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
