"""Modality expansion over foreground data: contours, color histograms,
background replacement.

Contours are traced along pixel edges (lattice corners, not pixel centers),
so the shoelace area of a hole-free component equals its pixel count
exactly. Orientation is counter-clockwise in the (x, y) plane, i.e. the
signed shoelace area is positive. Only outer boundaries are emitted; holes
inside a component are a documented limitation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifest import SegmentationMask


class EmptyMaskError(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass
class ContourSet:
    """Closed boundary polygons (first point == last point implied) and
    their enclosed areas in pixels^2, one per 4-connected component."""

    polygons: list[np.ndarray]  # each (K, 2) of (x, y) lattice vertices
    areas: list[float]


def shoelace_area(points: np.ndarray) -> float:
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _boundary_edges(mask: np.ndarray) -> dict:
    """Directed lattice edges around foreground, oriented so each component's
    outer loop has positive shoelace area."""
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask.astype(bool)
    core = padded[1:-1, 1:-1]

    edges: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def add(p, q):
        edges.setdefault(p, []).append(q)

    rows, cols = np.nonzero(core)
    for r, c in zip(rows.tolist(), cols.tolist()):
        if not padded[r, c + 1]:  # background above
            add((c, r), (c + 1, r))
        if not padded[r + 1, c + 2]:  # background right
            add((c + 1, r), (c + 1, r + 1))
        if not padded[r + 2, c + 1]:  # background below
            add((c + 1, r + 1), (c, r + 1))
        if not padded[r + 1, c]:  # background left
            add((c, r + 1), (c, r))
    return edges


def _next_edge(edges, point, d_in):
    candidates = edges[point]
    if len(candidates) == 1:
        return candidates.pop(0)
    # at a pinch vertex two loops touch; take the sharpest left turn so each
    # component keeps its own boundary
    best_i, best_cross = 0, None
    for i, q in enumerate(candidates):
        d = (q[0] - point[0], q[1] - point[1])
        cross = d_in[0] * d[1] - d_in[1] * d[0]
        if best_cross is None or cross > best_cross:
            best_i, best_cross = i, cross
    return candidates.pop(best_i)


def _simplify(loop: list) -> np.ndarray:
    """Drop collinear lattice points, keeping only turn vertices."""
    pts = []
    n = len(loop)
    for i in range(n):
        prev_pt, pt, nxt = loop[i - 1], loop[i], loop[(i + 1) % n]
        d1 = (pt[0] - prev_pt[0], pt[1] - prev_pt[1])
        d2 = (nxt[0] - pt[0], nxt[1] - pt[1])
        if d1 != d2:
            pts.append(pt)
    return np.array(pts, dtype=np.int64)


def extract_contours(mask: SegmentationMask) -> ContourSet:
    """Outer boundary polygon of every 4-connected foreground component."""
    arr = mask.to_array()
    if not arr.any():
        raise EmptyMaskError("cannot trace contours of an empty mask")
    edges = _boundary_edges(arr)

    polygons = []
    areas = []
    while edges:
        start = min(edges)
        prev = start
        first = edges[start].pop(0)
        if not edges[start]:
            del edges[start]
        loop = [start]
        point = first
        d_in = (point[0] - start[0], point[1] - start[1])
        while point != start:
            loop.append(point)
            nxt = _next_edge(edges, point, d_in)
            if not edges[point]:
                del edges[point]
            d_in = (nxt[0] - point[0], nxt[1] - point[1])
            prev, point = point, nxt
        poly = _simplify(loop)
        area = shoelace_area(poly)
        if area > 0:  # negative loops are hole boundaries
            polygons.append(poly)
            areas.append(area)
    return ContourSet(polygons=polygons, areas=areas)


@dataclass
class ColorHistogram:
    """Joint RGB histogram over foreground pixels only. counts has shape
    (bins, bins, bins) and sums to the foreground pixel count."""

    bins_per_channel: int
    counts: np.ndarray
    total: int


def foreground_histogram(
    image: np.ndarray, mask: SegmentationMask, bins_per_channel: int = 8
) -> ColorHistogram:
    image = np.asarray(image)
    if image.shape[:2] != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs mask {mask.height}x{mask.width}"
        )
    fg = mask.to_array().astype(bool)
    if not fg.any():
        raise EmptyMaskError("histogram needs a non-empty mask")
    pixels = image[fg].astype(np.int64)
    binned = pixels * bins_per_channel // 256
    counts = np.zeros((bins_per_channel,) * 3, dtype=np.int64)
    np.add.at(counts, (binned[:, 0], binned[:, 1], binned[:, 2]), 1)
    return ColorHistogram(bins_per_channel, counts, int(fg.sum()))


def replace_background(
    image: np.ndarray, mask: SegmentationMask, background: np.ndarray
) -> np.ndarray:
    """mask=1 pixels from image, mask=0 pixels from background."""
    image = np.asarray(image)
    background = np.asarray(background)
    if image.shape[:2] != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs mask {mask.height}x{mask.width}"
        )
    if background.shape != image.shape:
        raise DimensionMismatch(
            f"background {background.shape} vs image {image.shape}"
        )
    fg = mask.to_array().astype(bool)
    out = background.copy()
    out[fg] = image[fg]
    return out


def histogram_csv_rows(hist: ColorHistogram) -> list[tuple[int, int, int, int]]:
    """Non-empty joint bins as (r_bin, g_bin, b_bin, count) rows."""
    rows = []
    nz = np.nonzero(hist.counts)
    for r, g, b in zip(*nz):
        rows.append((int(r), int(g), int(b), int(hist.counts[r, g, b])))
    return rows
