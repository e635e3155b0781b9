"""Cross-validation harness over source/foreground dataset pairs.

For each backbone the protocol enumerates the four train/test pairings
(source->source, source->fg, fg->fg, fg->source) and aggregates three
claims from the resulting table: the average accuracy drop when source-
trained models are tested on foreground data, the average drop in the
reverse direction, and whether foreground training beats source training
in every cell.

The "toy-linear" backbone (a ridge probe over frozen stub embeddings) runs
the whole protocol in seconds on a laptop. The four full-scale backbones
are registered by name but require GPU fine-tuning stacks that live outside
this package; results for them are reproduced here only as the shipped
reference transcription.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .images import load_image
from .manifest import DatasetManifest, load_manifest
from .models import (
    BackendError,
    BackendUnavailable,
    FeatureExtractorConfig,
    extract_features,
)

CROSS_ORDER = ("source->source", "source->fg", "fg->fg", "fg->source")

FULL_SCALE_BACKBONES = ("vit-b16", "resnet50", "swinv2-b", "convnext-b")
# documented defaults for optional full-scale runs (not claims): input
# resolution 224, batch 64, AdamW lr 1e-4, 30 epochs, cosine decay
FULL_SCALE_DEFAULTS = {
    "resolution": 224,
    "batch_size": 64,
    "optimizer": "adamw",
    "learning_rate": 1e-4,
    "epochs": 30,
    "schedule": "cosine",
}


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    train_manifest: str
    test_manifest: str
    backbone_id: str
    seed: int = 0
    hyperparams: tuple = ()  # sorted (key, value) pairs; dicts accepted in helpers

    def digest(self) -> str:
        canon = json.dumps(
            {
                "train": self.train_manifest,
                "test": self.test_manifest,
                "backbone": self.backbone_id,
                "seed": self.seed,
                "hyperparams": list(self.hyperparams),
            },
            sort_keys=True,
        )
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def hyperparam(self, key, default=None):
        return dict(self.hyperparams).get(key, default)


def make_spec(train, test, backbone, seed=0, hyperparams: Optional[dict] = None) -> ExperimentSpec:
    hp = tuple(sorted((hyperparams or {}).items()))
    return ExperimentSpec(train, test, backbone, seed, hp)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    top1_accuracy: float
    per_class_accuracy: dict
    n_test: int


@dataclass
class ClaimSummary:
    avg_source_to_fg_drop: float
    avg_fg_to_source_drop: float
    fg_training_improvements: list  # (dataset, backbone, delta)
    all_improvements_positive: bool
    notes: list = field(default_factory=list)


def make_cross_protocol(
    source: str, fg: str, backbones: list[str], seed: int = 0, hyperparams: Optional[dict] = None
) -> list[ExperimentSpec]:
    """The four train/test pairings per backbone, in table row order."""
    if source == fg:
        raise BenchError("source and foreground manifests must differ")
    pairs = [(source, source), (source, fg), (fg, fg), (fg, source)]
    return [
        make_spec(train, test, backbone, seed, hyperparams)
        for train, test in pairs
        for backbone in backbones
    ]


def evaluate_accuracy(predictions, labels) -> float:
    predictions = list(predictions)
    labels = list(labels)
    if len(predictions) != len(labels):
        raise BenchError(f"{len(predictions)} predictions vs {len(labels)} labels")
    if not labels:
        raise BenchError("cannot score an empty evaluation set")
    matches = sum(1 for p, t in zip(predictions, labels) if p == t)
    return 100.0 * matches / len(labels)


def per_class_accuracy(predictions, labels) -> dict:
    totals: dict[int, int] = {}
    hits: dict[int, int] = {}
    for p, t in zip(predictions, labels):
        totals[t] = totals.get(t, 0) + 1
        hits[t] = hits.get(t, 0) + (1 if p == t else 0)
    return {c: 100.0 * hits[c] / totals[c] for c in sorted(totals)}


# ---------------------------------------------------------------------------
# trainers


class ToyLinearTrainer:
    """Ridge regression to one-hot targets over fixed features; prediction is
    the argmax over class scores. Closed form, so fully deterministic."""

    def fit_predict(self, spec: ExperimentSpec, x_train, y_train, x_test) -> np.ndarray:
        lam = float(spec.hyperparam("ridge_lambda", 1e-2))
        x_train = np.asarray(x_train, dtype=np.float64)
        x_test = np.asarray(x_test, dtype=np.float64)
        y_train = np.asarray(y_train)
        classes = int(y_train.max()) + 1
        onehot = np.eye(classes)[y_train]
        mean = x_train.mean(axis=0)
        xc = x_train - mean
        gram = xc.T @ xc + lam * np.eye(xc.shape[1])
        weights = np.linalg.solve(gram, xc.T @ onehot)
        scores = (x_test - mean) @ weights
        return np.argmax(scores, axis=1)


def _unavailable_trainer(backbone_id):
    def factory():
        raise BackendUnavailable(
            f"backbone {backbone_id!r} needs the optional GPU fine-tuning stack "
            f"(defaults: {FULL_SCALE_DEFAULTS})"
        )

    return factory


TRAINER_BACKENDS = {"toy-linear": ToyLinearTrainer}
TRAINER_BACKENDS.update({b: _unavailable_trainer(b) for b in FULL_SCALE_BACKBONES})


# ---------------------------------------------------------------------------
# data sources


class ArrayDataSource:
    """In-memory datasets: name -> (x_train, y_train, x_test, y_test)."""

    def __init__(self, datasets: dict):
        self.datasets = datasets

    def load(self, manifest_name: str, split: str):
        if manifest_name not in self.datasets:
            raise BenchError(f"unknown manifest {manifest_name!r}")
        x_tr, y_tr, x_te, y_te = self.datasets[manifest_name]
        return (x_tr, y_tr) if split == "train" else (x_te, y_te)


class ManifestDataSource:
    """Resolves manifest names to files, loads each record's image (the
    composited one when present) and embeds it with the frozen extractor."""

    def __init__(
        self,
        entries: dict,  # name -> (manifest_path, images_root)
        extractor: Optional[FeatureExtractorConfig] = None,
    ):
        self.entries = {k: (Path(p), Path(r)) for k, (p, r) in entries.items()}
        self.extractor = extractor or FeatureExtractorConfig()
        self._cache: dict = {}

    def load(self, manifest_name: str, split: str):
        key = (manifest_name, split)
        if key in self._cache:
            return self._cache[key]
        if manifest_name not in self.entries:
            raise BenchError(f"unknown manifest {manifest_name!r}")
        manifest_path, images_root = self.entries[manifest_name]
        manifest = load_manifest(manifest_path)
        records = [
            r for r in manifest.subset(split) if (images_root / (r.fg_path or r.source_path)).exists()
        ]
        if not records:
            raise BenchError(f"no usable {split} records in {manifest_name!r}")
        images = [load_image(images_root / (r.fg_path or r.source_path)) for r in records]
        feats = extract_features(images, self.extractor)
        labels = np.array([r.class_id for r in records])
        self._cache[key] = (feats, labels)
        return self._cache[key]


# ---------------------------------------------------------------------------
# results store


class ResultsStore:
    """Append-only CSV of results plus a digest index; rerunning a stored
    spec digest returns the stored row untouched."""

    COLUMNS = ("train", "test", "backbone", "seed", "n_test", "top1")

    def __init__(self, directory: str | Path):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.csv_path = self.dir / "results.csv"
        self.index_path = self.dir / "index.json"

    def _index(self) -> dict:
        if self.index_path.exists():
            return json.loads(self.index_path.read_text())
        return {}

    def get(self, digest: str) -> Optional[dict]:
        return self._index().get(digest)

    def put(self, digest: str, row: dict) -> None:
        new_file = not self.csv_path.exists()
        with open(self.csv_path, "a", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.COLUMNS)
            if new_file:
                writer.writeheader()
            writer.writerow({k: row[k] for k in self.COLUMNS})
        index = self._index()
        index[digest] = row
        self.index_path.write_text(json.dumps(index, indent=1, sort_keys=True))

    def rows(self) -> list[dict]:
        if not self.csv_path.exists():
            return []
        with open(self.csv_path, newline="") as fh:
            return [
                {**r, "seed": int(r["seed"]), "n_test": int(r["n_test"]), "top1": float(r["top1"])}
                for r in csv.DictReader(fh)
            ]


def run_experiment(
    spec: ExperimentSpec, data_source, store: Optional[ResultsStore] = None
) -> ExperimentResult:
    """Train per the spec and score top-1 accuracy on the test manifest's
    test split. Results are content-addressed by the spec digest."""
    digest = spec.digest()
    if store is not None:
        cached = store.get(digest)
        if cached is not None:
            return ExperimentResult(
                spec, cached["top1"], cached.get("per_class", {}), cached["n_test"]
            )

    try:
        factory = TRAINER_BACKENDS[spec.backbone_id]
    except KeyError:
        raise BackendError(
            f"unknown trainer backend {spec.backbone_id!r}; "
            f"registered: {sorted(TRAINER_BACKENDS)}"
        ) from None
    trainer = factory()

    x_train, y_train = data_source.load(spec.train_manifest, "train")
    x_test, y_test = data_source.load(spec.test_manifest, "test")
    predictions = trainer.fit_predict(spec, x_train, y_train, x_test)
    top1 = evaluate_accuracy(predictions, list(y_test))
    result = ExperimentResult(
        spec,
        top1,
        per_class_accuracy(predictions, list(y_test)),
        len(y_test),
    )
    if store is not None:
        store.put(
            digest,
            {
                "train": spec.train_manifest,
                "test": spec.test_manifest,
                "backbone": spec.backbone_id,
                "seed": spec.seed,
                "n_test": result.n_test,
                "top1": result.top1_accuracy,
            },
        )
    return result


# ---------------------------------------------------------------------------
# claim aggregation and reporting


def infer_pairs(rows: list[dict]) -> list[tuple[str, str]]:
    """Pair source names with their *_fg variants, in first-seen order."""
    names: list[str] = []
    for r in rows:
        for n in (r["train"], r["test"]):
            if n not in names:
                names.append(n)
    pairs = []
    for name in names:
        if name.lower().endswith("_fg"):
            continue
        for candidate in names:
            if candidate.lower() == f"{name.lower()}_fg":
                pairs.append((name, candidate))
                break
    if not pairs:
        raise BenchError("no source/foreground manifest pairs found in results")
    return pairs


def _cell(rows, train, test, backbone):
    for r in rows:
        if r["train"] == train and r["test"] == test and r["backbone"] == backbone:
            return r["top1"]
    return None


def summarize_claims(rows: list[dict], pairs: Optional[list] = None) -> ClaimSummary:
    """Aggregate the three headline statistics from a complete results table.

    Per (dataset pair, backbone) cell block: source->fg drop, fg->source
    drop, and the fg-training improvement. Averages are plain means over all
    blocks present; incomplete blocks are an error.
    """
    pairs = pairs or infer_pairs(rows)
    backbones = []
    for r in rows:
        if r["backbone"] not in backbones:
            backbones.append(r["backbone"])

    s2f_drops = []
    f2s_drops = []
    improvements = []
    missing = []
    for source, fg in pairs:
        for backbone in backbones:
            cells = {
                "source->source": _cell(rows, source, source, backbone),
                "source->fg": _cell(rows, source, fg, backbone),
                "fg->fg": _cell(rows, fg, fg, backbone),
                "fg->source": _cell(rows, fg, source, backbone),
            }
            absent = [k for k, v in cells.items() if v is None]
            if absent:
                missing.extend(f"{source}/{backbone}: {k}" for k in absent)
                continue
            s2f_drops.append(cells["source->source"] - cells["source->fg"])
            f2s_drops.append(cells["fg->fg"] - cells["fg->source"])
            improvements.append((source, backbone, cells["fg->fg"] - cells["source->source"]))
    if missing:
        raise BenchError("incomplete result blocks: " + "; ".join(missing))

    summary = ClaimSummary(
        avg_source_to_fg_drop=float(np.mean(s2f_drops)),
        avg_fg_to_source_drop=float(np.mean(f2s_drops)),
        fg_training_improvements=improvements,
        all_improvements_positive=all(d > 0 for _, _, d in improvements),
    )
    _annotate_against_reference(summary)
    return summary


def reference_rows() -> list[dict]:
    """The shipped transcription of the published cross-validation table."""
    with resources.files("fgdata.data").joinpath("reference_cross_validation.csv").open() as fh:
        return [{**r, "top1": float(r["top1"])} for r in csv.DictReader(fh)]


def reference_claims() -> dict:
    with resources.files("fgdata.data").joinpath("reference_claims.json").open() as fh:
        return json.load(fh)


def _annotate_against_reference(summary: ClaimSummary) -> None:
    claims = reference_claims()
    floor = claims["avg_source_to_fg_drop_at_least"]
    if summary.avg_source_to_fg_drop < floor:
        summary.notes.append(
            f"computed mean source->fg drop is {summary.avg_source_to_fg_drop:.2f} points; "
            f"the published summary cites over {floor:g}% on average, which this "
            f"cell-mean does not reproduce (formula kept as defined, not tuned)"
        )
    ceil = claims["avg_fg_to_source_drop_at_most"]
    if summary.avg_fg_to_source_drop > ceil:
        summary.notes.append(
            f"computed mean fg->source drop {summary.avg_fg_to_source_drop:.2f} exceeds "
            f"the published bound of {ceil:g}%"
        )


def render_table(rows: list[dict], pairs: Optional[list] = None) -> str:
    """Text table in the reference layout: one row per train/test pairing,
    one column per backbone."""
    pairs = pairs or infer_pairs(rows)
    backbones = []
    for r in rows:
        if r["backbone"] not in backbones:
            backbones.append(r["backbone"])
    width = max(12, max(len(b) for b in backbones) + 2)
    head = f"{'Train':<14}{'Test':<14}" + "".join(f"{b:>{width}}" for b in backbones)
    lines = [head, "-" * len(head)]
    for source, fg in pairs:
        for train, test in ((source, source), (source, fg), (fg, fg), (fg, source)):
            cells = []
            for b in backbones:
                v = _cell(rows, train, test, b)
                cells.append(f"{v:>{width}.1f}" if v is not None else f"{'-':>{width}}")
            lines.append(f"{train:<14}{test:<14}" + "".join(cells))
        lines.append("-" * len(head))
    return "\n".join(lines)


def render_claims(summary: ClaimSummary) -> str:
    lines = [
        f"avg source->fg drop: {summary.avg_source_to_fg_drop:.2f} points",
        f"avg fg->source drop: {summary.avg_fg_to_source_drop:.2f} points",
        f"fg-training improvements positive in all cells: {summary.all_improvements_positive}",
    ]
    for dataset, backbone, delta in summary.fg_training_improvements:
        lines.append(f"  {dataset:<10} {backbone:<12} {delta:+.2f}")
    for note in summary.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines)


def write_report(rows: list[dict], out_dir: str | Path, pairs: Optional[list] = None) -> dict:
    """Emit the table (txt + csv), the claim summary, and one grouped bar
    chart per dataset pair. Returns the artifact paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pairs = pairs or infer_pairs(rows)
    artifacts = {}

    table_txt = out / "cross_validation_table.txt"
    table_txt.write_text(render_table(rows, pairs) + "\n")
    artifacts["table_txt"] = table_txt

    table_csv = out / "cross_validation_table.csv"
    with open(table_csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["train", "test", "backbone", "top1"])
        writer.writeheader()
        for r in rows:
            writer.writerow({k: r[k] for k in ("train", "test", "backbone", "top1")})
    artifacts["table_csv"] = table_csv

    summary = summarize_claims(rows, pairs)
    claims_txt = out / "claims.txt"
    claims_txt.write_text(render_claims(summary) + "\n")
    artifacts["claims_txt"] = claims_txt

    backbones = []
    for r in rows:
        if r["backbone"] not in backbones:
            backbones.append(r["backbone"])
    for source, fg in pairs:
        combos = [(source, source), (source, fg), (fg, fg), (fg, source)]
        x = np.arange(len(backbones))
        bar_w = 0.8 / len(combos)
        fig, ax = plt.subplots(figsize=(7, 4))
        for i, (train, test) in enumerate(combos):
            vals = [_cell(rows, train, test, b) or 0.0 for b in backbones]
            ax.bar(x + i * bar_w, vals, bar_w, label=f"{train}→{test}")
        ax.set_xticks(x + 1.5 * bar_w)
        ax.set_xticklabels(backbones)
        ax.set_ylabel("top-1 accuracy (%)")
        ax.set_title(f"cross-validation: {source} vs {fg}")
        lo = min(r["top1"] for r in rows if r["train"] in (source, fg))
        ax.set_ylim(max(0.0, lo - 5.0), 100.0)
        ax.legend(fontsize=8)
        fig.tight_layout()
        chart = out / f"cross_validation_{source.lower()}.png"
        fig.savefig(chart, dpi=120)
        plt.close(fig)
        artifacts[f"chart_{source}"] = chart
    artifacts["summary"] = summary
    return artifacts
