"""Synthetic fixture generation.

Builds small dataset trees whose ground truth is known by construction:
every image carries a sidecar with its true box, and failure images carry
the sidecar overrides that reproduce each of the flagged failure shapes.
Also builds the signal-plus-noise embedding fixture used as the desk-scale
analog of background removal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .images import save_image, write_sidecar
from .ingest import load_source_dataset
from .manifest import DatasetManifest, FlagKind

CLASS_COLORS = {
    "ruby": (200, 40, 40),
    "teal": (40, 160, 160),
    "gold": (220, 180, 40),
    "plum": (140, 60, 160),
}

# injected failure recipes: (name suffix, sidecar overrides, expected flags)
FAILURE_RECIPES = [
    ("blank", {"detections": []}, {FlagKind.NO_SUBJECT}),
    (
        "wrong_label",
        {"label": "dog"},
        {FlagKind.WRONG_SUBJECT},
    ),
    (
        "full_mask",
        {"segment_mode": "full"},
        {FlagKind.UNWANTED_BACKGROUND},
    ),
    (
        "fragments",
        {"segment_mode": "fragments"},
        {FlagKind.INCOMPLETE_OBJECT},
    ),
    (
        "tiny_mask",
        {"segment_mode": "tiny"},
        {FlagKind.INCOMPLETE_OBJECT},
    ),
    (
        "ambiguous",
        {"second_detection": True},
        {FlagKind.AMBIGUOUS},
    ),
]


@dataclass
class CorpusInfo:
    root: Path
    manifest: DatasetManifest
    expected_flags: dict = field(default_factory=dict)  # record_id -> set[FlagKind]

    @property
    def clean_ids(self) -> list[str]:
        return [r.record_id for r in self.manifest.records if r.record_id not in self.expected_flags]


def _subject_image(
    rng: np.random.Generator, color, clutter: int = 0
) -> tuple[np.ndarray, tuple[int, int, int, int]]:
    h = int(rng.integers(48, 80))
    w = int(rng.integers(56, 96))
    px = np.full((h, w, 3), 255, np.uint8)
    # class-independent background clutter, drawn before (so never over) the
    # subject; removing it is what makes the foreground variant cleaner
    for _ in range(clutter):
        cw = int(rng.integers(4, 14))
        ch = int(rng.integers(4, 14))
        cx = int(rng.integers(0, max(1, w - cw)))
        cy = int(rng.integers(0, max(1, h - ch)))
        px[cy : cy + ch, cx : cx + cw] = rng.integers(0, 256, 3)
    bw = int(rng.integers(12, w // 2))
    bh = int(rng.integers(12, h // 2))
    bx = int(rng.integers(4, w - bw - 4))
    by = int(rng.integers(4, h - bh - 4))
    px[by : by + bh, bx : bx + bw] = color
    # light texture inside the subject so images within a class differ
    noise = rng.integers(-20, 20, (bh, bw, 3))
    px[by : by + bh, bx : bx + bw] = np.clip(
        px[by : by + bh, bx : bx + bw].astype(int) + noise, 0, 255
    ).astype(np.uint8)
    return px, (bx, by, bw, bh)


def _write_fixture_image(path: Path, px, box, label="object", score=1.0, overrides=None):
    save_image(px, path)
    overrides = overrides or {}
    if "detections" in overrides:
        sidecar = {"detections": overrides["detections"]}
    else:
        x, y, w, h = box
        det = {"box": [x, y, w, h], "score": score, "label": overrides.get("label", label)}
        dets = [det]
        if overrides.get("second_detection"):
            x2 = max(0, x - 3)
            dets.append({"box": [x2, y, w, h], "score": score - 0.05, "label": label})
        sidecar = {"detections": dets}
    if "segment_mode" in (overrides or {}):
        sidecar["segment_mode"] = overrides["segment_mode"]
    write_sidecar(path, sidecar)


def make_corpus(
    root: str | Path,
    n_clean: int = 54,
    n_classes: int = 3,
    seed: int = 0,
    with_failures: bool = True,
    test_fraction: float = 0.25,
    clutter: int = 0,
) -> CorpusInfo:
    """Write a generic-layout dataset tree under root and ingest it.

    n_clean images process cleanly; with_failures adds one image per failure
    recipe (all in the train split), each expected to receive exactly the
    designated flag kind. clutter > 0 scatters class-independent background
    rectangles that the foreground composite removes.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    classes = list(CLASS_COLORS)[:n_classes]
    expected: dict[str, set] = {}

    n_test = int(n_clean * test_fraction)
    for i in range(n_clean):
        cls = classes[i % n_classes]
        split = "test" if i < n_test else "train"
        px, box = _subject_image(rng, CLASS_COLORS[cls], clutter=clutter)
        path = root / split / cls / f"img_{i:03d}.png"
        _write_fixture_image(path, px, box)

    if with_failures:
        for j, (suffix, overrides, flags) in enumerate(FAILURE_RECIPES):
            cls = classes[j % n_classes]
            if suffix == "blank":
                px = np.full((60, 80, 3), 255, np.uint8)
                box = (0, 0, 1, 1)
            elif suffix == "full_mask":
                # box covers ~30% of the image; the full-image mask then has
                # a mask/box ratio well above the unwanted-background limit
                px = np.full((60, 80, 3), 255, np.uint8)
                box = (10, 10, 40, 36)
                px[10:46, 10:50] = CLASS_COLORS[cls]
            elif suffix in ("fragments", "tiny_mask"):
                px = np.full((64, 64, 3), 255, np.uint8)
                box = (20, 20, 20, 20)
                px[20:40, 20:40] = CLASS_COLORS[cls]
            else:
                px, box = _subject_image(rng, CLASS_COLORS[cls])
            path = root / "train" / cls / f"fail_{suffix}.png"
            _write_fixture_image(path, px, box, overrides=overrides)
            expected[str(path.relative_to(root))] = set(flags)

    manifest = load_source_dataset(root, "generic", name="corpus")
    return CorpusInfo(root=root, manifest=manifest, expected_flags=expected)


def signal_noise_embeddings(
    n_classes: int = 5,
    n_per_class: int = 30,
    signal_dim: int = 8,
    noise_dim: int = 24,
    signal_spread: float = 5.0,
    noise_scale: float = 10.0,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Embedding-space analog of background removal.

    Returns (source, foreground, labels): class identity lives in the signal
    dimensions; the source variant adds shared high-variance noise dimensions
    and the foreground variant zeroes them, mimicking what masking the
    background does to frozen features.
    """
    rng = np.random.default_rng(seed)
    n = n_classes * n_per_class
    labels = np.repeat(np.arange(n_classes), n_per_class)
    centers = rng.standard_normal((n_classes, signal_dim)) * signal_spread
    signal = centers[labels] + rng.standard_normal((n, signal_dim))
    noise = rng.standard_normal((n, noise_dim)) * noise_scale
    source = np.concatenate([signal, noise], axis=1)
    foreground = np.concatenate([signal, np.zeros_like(noise)], axis=1)
    return source, foreground, labels
