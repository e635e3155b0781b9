"""Ingestion of source datasets into manifests.

Supported layouts:
  cub       CUB-200-2011: images.txt, image_class_labels.txt, classes.txt,
            train_test_split.txt, images/ tree.
  cars      Stanford Cars: cars_annos.mat (annotations + class_names) with
            image paths relative to the root.
  aircraft  FGVC-Aircraft (fgvc-aircraft-2013b): variant-level labels from
            data/images_variant_{trainval,test}.txt. The trainval split maps
            to train; this policy is recorded in provenance.
  generic   A directory of class directories, optionally nested under
            train/ and test/ roots (otherwise everything is train).

Record identity is the image path relative to the dataset root, which stays
stable when a foreground tree replaces the source tree.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from .manifest import DatasetManifest, ImageRecord, ManifestError

IMAGE_EXTENSIONS = {".jpg", ".jpeg", ".png", ".bmp"}


class IngestionError(RuntimeError):
    pass


def _require(path: Path) -> Path:
    if not path.exists():
        raise IngestionError(f"missing annotation file: {path}")
    return path


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(_require(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(maxsplit=1)
        if len(parts) != 2:
            raise IngestionError(f"{path}:{lineno}: expected two fields")
        pairs.append((parts[0], parts[1]))
    return pairs


def load_source_dataset(
    root_path: str | Path,
    kind: str,
    name: Optional[str] = None,
    errors: Optional[list[str]] = None,
) -> DatasetManifest:
    """Build a manifest from a dataset's published layout.

    Unreadable/missing image files are collected into `errors` (when given)
    and their records skipped; missing annotation files abort ingestion.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise IngestionError(f"dataset root is not a directory: {root}")
    if errors is None:
        errors = []

    if kind == "cub":
        manifest = _ingest_cub(root, name or "cub", errors)
    elif kind == "cars":
        manifest = _ingest_cars(root, name or "cars", errors)
    elif kind == "aircraft":
        manifest = _ingest_aircraft(root, name or "aircraft", errors)
    elif kind == "generic":
        manifest = _ingest_generic(root, name or root.name, errors)
    else:
        raise IngestionError(f"unknown dataset kind {kind!r}")

    if not manifest.records:
        raise IngestionError(f"no images ingested from {root} as kind {kind!r}")
    return manifest


def _checked_record(
    root: Path, rel: str, class_id: int, class_name: str, split: str, errors: list[str]
) -> Optional[ImageRecord]:
    if not (root / rel).is_file():
        errors.append(f"unreadable image: {rel}")
        return None
    return ImageRecord(
        record_id=rel, class_id=class_id, class_name=class_name, split=split, source_path=rel
    )


def _ingest_cub(root: Path, name: str, errors: list[str]) -> DatasetManifest:
    classes_raw = _read_pairs(root / "classes.txt")
    classes = [cname for _, cname in classes_raw]
    images = _read_pairs(root / "images.txt")
    labels = dict(_read_pairs(root / "image_class_labels.txt"))
    split_flags = dict(_read_pairs(root / "train_test_split.txt"))

    records = []
    for img_id, rel_name in images:
        if img_id not in labels:
            raise IngestionError(f"image id {img_id} missing from image_class_labels.txt")
        if img_id not in split_flags:
            raise IngestionError(f"image id {img_id} missing from train_test_split.txt")
        class_id = int(labels[img_id]) - 1  # file is 1-based
        split = "train" if split_flags[img_id] == "1" else "test"
        rel = f"images/{rel_name}"
        rec = _checked_record(root, rel, class_id, classes[class_id], split, errors)
        if rec:
            records.append(rec)
    return DatasetManifest(
        name=name,
        kind="cub",
        classes=classes,
        records=records,
        provenance={"source": "original", "layout": "cub-200-2011"},
    )


def _ingest_cars(root: Path, name: str, errors: list[str]) -> DatasetManifest:
    from scipy.io import loadmat

    annos_path = _require(root / "cars_annos.mat")
    try:
        mat = loadmat(str(annos_path), squeeze_me=True, struct_as_record=False)
        class_names = [str(c) for c in mat["class_names"]]
        annotations = mat["annotations"]
    except (KeyError, ValueError, NotImplementedError) as exc:
        raise IngestionError(f"cannot parse {annos_path}: {exc}") from exc

    records = []
    try:
        iterator = list(annotations)
    except TypeError:
        iterator = [annotations]
    for ann in iterator:
        rel = str(ann.relative_im_path)
        class_id = int(ann.__dict__["class"]) - 1  # 'class' is a keyword
        split = "test" if int(ann.test) == 1 else "train"
        rec = _checked_record(root, rel, class_id, class_names[class_id], split, errors)
        if rec:
            records.append(rec)
    return DatasetManifest(
        name=name,
        kind="cars",
        classes=class_names,
        records=records,
        provenance={"source": "original", "layout": "stanford-cars cars_annos.mat"},
    )


def _ingest_aircraft(root: Path, name: str, errors: list[str]) -> DatasetManifest:
    data = root / "data" if (root / "data").is_dir() else root
    variants = [
        v.strip() for v in _require(data / "variants.txt").read_text().splitlines() if v.strip()
    ]
    class_index = {v: i for i, v in enumerate(variants)}

    records = []
    for fname, split in (("images_variant_trainval.txt", "train"), ("images_variant_test.txt", "test")):
        for img_id, variant in _read_pairs(data / fname):
            if variant not in class_index:
                raise IngestionError(f"unknown variant {variant!r} in {fname}")
            rel = str(Path(data.relative_to(root) / "images" / f"{img_id}.jpg")) if data != root else f"images/{img_id}.jpg"
            rec = _checked_record(root, rel, class_index[variant], variant, split, errors)
            if rec:
                records.append(rec)
    return DatasetManifest(
        name=name,
        kind="aircraft",
        classes=variants,
        records=records,
        provenance={
            "source": "original",
            "layout": "fgvc-aircraft-2013b variants",
            "split_policy": "trainval->train,test->test",
        },
    )


def _ingest_generic(root: Path, name: str, errors: list[str]) -> DatasetManifest:
    split_dirs = [(d, d.name) for d in (root / "train", root / "test") if d.is_dir()]
    if not split_dirs:
        split_dirs = [(root, "train")]

    class_names = sorted(
        {d.name for base, _ in split_dirs for d in base.iterdir() if d.is_dir()}
    )
    if not class_names:
        raise IngestionError(f"no class directories under {root}")
    class_index = {c: i for i, c in enumerate(class_names)}

    records = []
    for base, split in split_dirs:
        for class_dir in sorted(d for d in base.iterdir() if d.is_dir()):
            for img in sorted(class_dir.iterdir()):
                if img.suffix.lower() not in IMAGE_EXTENSIONS:
                    continue
                rel = str(img.relative_to(root))
                rec = _checked_record(
                    root, rel, class_index[class_dir.name], class_dir.name, split, errors
                )
                if rec:
                    records.append(rec)
    return DatasetManifest(
        name=name,
        kind="generic",
        classes=class_names,
        records=records,
        provenance={"source": "original", "layout": "class-directories"},
    )
