"""Feature-distribution analysis: exact t-SNE projection and cluster
metrics quantifying intra-class tightness / inter-class separation.

The t-SNE here is the exact O(N^2) formulation (no tree approximation),
adequate for the few-thousand-point scatters this package produces. It is
seeded and fully deterministic, and it reports the KL divergence at
initialization and after the final step. Pairwise affinities are computed
from coordinate differences, so the embedding depends on the inputs only
through their pairwise distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform


class AnalyzeError(ValueError):
    pass


@dataclass
class TsneConfig:
    """learning_rate None picks max(N/12, 50) at run time; a fixed rate that
    is too hot for a small N makes the optimizer oscillate instead of
    converge."""

    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0:
            raise AnalyzeError("perplexity must be positive")
        if self.iterations <= 0:
            raise AnalyzeError("iterations must be positive")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise AnalyzeError("learning_rate must be positive")


@dataclass
class TsneResult:
    embedding: np.ndarray  # (N, 2)
    kl_initial: float
    kl_final: float


def _conditional_probabilities(d2: np.ndarray, perplexity: float) -> np.ndarray:
    """Per-point Gaussian affinities whose entropy matches log(perplexity),
    found by binary search over the precision."""
    n = d2.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        di = np.delete(d2[i], i)
        beta_lo, beta_hi = 0.0, np.inf
        beta = 1.0
        for _ in range(64):
            expd = np.exp(-di * beta)
            sum_e = expd.sum()
            if sum_e <= 0:
                entropy = 0.0
                pi = np.zeros_like(di)
            else:
                pi = expd / sum_e
                nz = pi > 0
                entropy = -np.sum(pi[nz] * np.log(pi[nz]))
            if abs(entropy - target) < 1e-7:
                break
            if entropy > target:
                beta_lo = beta
                beta = beta * 2 if beta_hi == np.inf else (beta + beta_hi) / 2
            else:
                beta_hi = beta
                beta = (beta + beta_lo) / 2
        row = np.insert(pi, i, 0.0)
        p[i] = row
    return p


def _kl_divergence(p: np.ndarray, y: np.ndarray) -> float:
    n = y.shape[0]
    num = 1.0 / (1.0 + squareform(pdist(y)) ** 2)
    np.fill_diagonal(num, 0.0)
    q = np.maximum(num / num.sum(), 1e-12)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def tsne_embed(embeddings: np.ndarray, config: TsneConfig) -> TsneResult:
    """Project N x D embeddings to 2-D. Deterministic for a fixed seed."""
    x = np.asarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise AnalyzeError("need at least 2 points in a 2-D array")
    n = x.shape[0]
    if config.perplexity >= (n - 1) / 3:
        raise AnalyzeError(
            f"perplexity {config.perplexity} infeasible for {n} points; "
            f"need perplexity < (N-1)/3"
        )

    d2 = squareform(pdist(x)) ** 2
    p_cond = _conditional_probabilities(d2, config.perplexity)
    p = (p_cond + p_cond.T) / (2.0 * n)
    p = np.maximum(p, 1e-12)
    np.fill_diagonal(p, 0.0)

    rng = np.random.default_rng(config.seed)
    y = rng.standard_normal((n, 2)) * 1e-4
    kl_initial = _kl_divergence(p, y)

    learning_rate = config.learning_rate if config.learning_rate is not None else max(n / 12.0, 50.0)
    exaggeration_until = min(250, max(1, config.iterations // 4))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    for it in range(config.iterations):
        p_eff = p * 12.0 if it < exaggeration_until else p
        num = 1.0 / (1.0 + squareform(pdist(y)) ** 2)
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), 1e-12)
        pq = (p_eff - q) * num
        grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)

        momentum = 0.5 if it < 250 else 0.8
        sign_agree = np.sign(grad) == np.sign(velocity)
        gains = np.where(sign_agree, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        velocity = momentum * velocity - learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)

    return TsneResult(embedding=y, kl_initial=kl_initial, kl_final=_kl_divergence(p, y))


@dataclass
class ClusterReport:
    silhouette: float
    mean_intra_class_distance: float
    mean_inter_centroid_distance: float


def cluster_metrics(points: np.ndarray, labels) -> ClusterReport:
    """Mean silhouette coefficient plus intra/inter distance summaries,
    computed with Euclidean distances in the space handed in."""
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise AnalyzeError("cluster metrics need at least 2 classes")
    for c in classes:
        if np.sum(labels == c) < 2:
            raise AnalyzeError(f"class {c!r} has fewer than 2 points")

    dist = cdist(points, points)
    n = points.shape[0]
    sil = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        a = dist[i, same & (np.arange(n) != i)].mean()
        b = min(dist[i, labels == c].mean() for c in classes if c != labels[i])
        sil[i] = (b - a) / max(a, b)

    intra = []
    centroids = []
    for c in classes:
        members = points[labels == c]
        centroids.append(members.mean(axis=0))
        intra.extend(pdist(members))
    inter = pdist(np.stack(centroids))

    return ClusterReport(
        silhouette=float(sil.mean()),
        mean_intra_class_distance=float(np.mean(intra)),
        mean_inter_centroid_distance=float(np.mean(inter)),
    )


def compare_distributions(
    source_embeddings: np.ndarray,
    source_labels,
    fg_embeddings: np.ndarray,
    fg_labels,
    config: Optional[TsneConfig] = None,
    out_dir: Optional[str | Path] = None,
    metrics_on_projection: bool = False,
) -> tuple[ClusterReport, ClusterReport, dict]:
    """Paired cluster reports for a source/foreground embedding pair, plus
    side-by-side scatter artifacts when out_dir is given.

    Metrics default to the original embedding space; 2-D projections distort
    distances and are used for the scatter plots only (or for the metrics
    too when metrics_on_projection is set).
    """
    source_embeddings = np.asarray(source_embeddings)
    fg_embeddings = np.asarray(fg_embeddings)
    if source_embeddings.shape[1] != fg_embeddings.shape[1]:
        raise AnalyzeError(
            f"embedding dims differ: {source_embeddings.shape[1]} vs "
            f"{fg_embeddings.shape[1]}; both sides must use the same extractor"
        )
    config = config or TsneConfig()

    source_2d = tsne_embed(source_embeddings, config)
    fg_2d = tsne_embed(fg_embeddings, config)

    if metrics_on_projection:
        source_report = cluster_metrics(source_2d.embedding, source_labels)
        fg_report = cluster_metrics(fg_2d.embedding, fg_labels)
    else:
        source_report = cluster_metrics(source_embeddings, source_labels)
        fg_report = cluster_metrics(fg_embeddings, fg_labels)

    artifacts: dict = {"source_tsne": source_2d, "fg_tsne": fg_2d}
    if out_dir is not None:
        artifacts.update(
            _write_scatter_artifacts(
                Path(out_dir), source_2d, source_labels, fg_2d, fg_labels
            )
        )
    return source_report, fg_report, artifacts


def _write_scatter_artifacts(out, source_2d, source_labels, fg_2d, fg_labels) -> dict:
    import csv

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for ax,(result, labels, title) in zip(
        axes,
        [(source_2d, source_labels, "source"), (fg_2d, fg_labels, "foreground")],
    ):
        pts = result.embedding
        ax.scatter(pts[:, 0], pts[:, 1], c=np.asarray(labels), cmap="tab10", s=12)
        ax.set_title(f"{title} (final KL {result.kl_final:.3f})")
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    scatter_path = out / "tsne_scatter.png"
    fig.savefig(scatter_path, dpi=120)
    plt.close(fig)
    paths["scatter_png"] = scatter_path

    for name, result, labels in (
        ("source", source_2d, source_labels),
        ("fg", fg_2d, fg_labels),
    ):
        csv_path = out / f"tsne_points_{name}.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "label"])
            for (px, py), lab in zip(result.embedding, np.asarray(labels)):
                writer.writerow([f"{px:.6f}", f"{py:.6f}", lab])
        paths[f"points_{name}_csv"] = csv_path
    return paths
