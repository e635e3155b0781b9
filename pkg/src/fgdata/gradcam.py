"""Gradient-weighted class activation maps.

Works against any adapter exposing spatial activations at a named layer and
the gradient of a class score with respect to them:

    activations_and_gradients(image, target_class, layer) -> (A, dA)
    score_from_activations(acts, target_class, layer) -> float
    layers() -> list of spatial layer names

Channel weights are the spatial mean of the gradients; the heatmap is the
ReLU'd weighted activation sum, bilinearly upsampled to the input size and
then min-max normalized. An all-zero map (zero gradients) skips
normalization and sets the degenerate flag instead of dividing by zero.

TinyConvNet is a self-contained two-conv/tanh/linear classifier with
analytic gradients, small enough for finite-difference checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CamError(ValueError):
    pass


@dataclass
class CamComputation:
    activations: np.ndarray  # (C, h, w)
    gradients: np.ndarray  # (C, h, w)
    channel_weights: np.ndarray  # (C,)
    heatmap: np.ndarray  # (H, W) in [0, 1]
    degenerate: bool = False


def bilinear_resize(grid: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bilinear interpolation with corner alignment."""
    in_h, in_w = grid.shape
    if (in_h, in_w) == (out_h, out_w):
        return grid.copy()
    ys = np.linspace(0, in_h - 1, out_h) if out_h > 1 else np.zeros(1)
    xs = np.linspace(0, in_w - 1, out_w) if out_w > 1 else np.zeros(1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = grid[np.ix_(y0, x0)] * (1 - wx) + grid[np.ix_(y0, x1)] * wx
    bottom = grid[np.ix_(y1, x0)] * (1 - wx) + grid[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


def cam_from_arrays(
    activations: np.ndarray, gradients: np.ndarray, out_h: int, out_w: int
) -> CamComputation:
    """Core CAM arithmetic over captured (activations, gradients)."""
    activations = np.asarray(activations, dtype=np.float64)
    gradients = np.asarray(gradients, dtype=np.float64)
    if activations.ndim != 3 or activations.shape != gradients.shape:
        raise CamError(
            f"need matching (C,h,w) arrays, got {activations.shape} and {gradients.shape}"
        )
    alpha = gradients.mean(axis=(1, 2))
    cam = np.maximum((alpha[:, None, None] * activations).sum(axis=0), 0.0)
    upsampled = bilinear_resize(cam, out_h, out_w)
    lo, hi = upsampled.min(), upsampled.max()
    if hi == 0.0:
        return CamComputation(activations, gradients, alpha, np.zeros((out_h, out_w)), True)
    if hi == lo:
        return CamComputation(activations, gradients, alpha, np.ones((out_h, out_w)), True)
    heatmap = (upsampled - lo) / (hi - lo)
    return CamComputation(activations, gradients, alpha, heatmap, False)


def grad_cam(model, image: np.ndarray, target_class: int, layer: str) -> CamComputation:
    image = np.asarray(image, dtype=np.float64)
    if layer not in model.layers():
        raise CamError(f"layer {layer!r} not spatial; options: {model.layers()}")
    activations, gradients = model.activations_and_gradients(image, target_class, layer)
    return cam_from_arrays(activations, gradients, image.shape[0], image.shape[1])


# ---------------------------------------------------------------------------
# toy models


def conv2d(inp: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid cross-correlation. inp (Ci,H,W), weights (Co,Ci,kh,kw)."""
    co, ci, kh, kw = weights.shape
    h = inp.shape[1] - kh + 1
    w = inp.shape[2] - kw + 1
    out = np.zeros((co, h, w))
    for dy in range(kh):
        for dx in range(kw):
            patch = inp[:, dy : dy + h, dx : dx + w]
            out += np.einsum("ihw,oi->ohw", patch, weights[:, :, dy, dx])
    return out + bias[:, None, None]


def conv2d_input_grad(dout: np.ndarray, weights: np.ndarray, in_shape) -> np.ndarray:
    """Gradient of a valid cross-correlation w.r.t. its input."""
    co, ci, kh, kw = weights.shape
    _, h_in, w_in = in_shape
    din = np.zeros(in_shape)
    h, w = dout.shape[1], dout.shape[2]
    for dy in range(kh):
        for dx in range(kw):
            din[:, dy : dy + h, dx : dx + w] += np.einsum(
                "ohw,oi->ihw", dout, weights[:, :, dy, dx]
            )
    return din


class TinyConvNet:
    """conv3x3 -> tanh -> conv3x3 -> tanh -> global mean pool -> linear.

    Smooth everywhere, so central finite differences converge cleanly.
    """

    def __init__(self, channels=(3, 4), n_classes=3, seed=0):
        rng = np.random.default_rng(seed)
        c1, c2 = channels
        self.w1 = rng.standard_normal((c1, 1, 3, 3)) * 0.5
        self.b1 = rng.standard_normal(c1) * 0.1
        self.w2 = rng.standard_normal((c2, c1, 3, 3)) * (0.5 / np.sqrt(c1))
        self.b2 = rng.standard_normal(c2) * 0.1
        self.wh = rng.standard_normal((n_classes, c2)) * (1.0 / np.sqrt(c2))
        self.bh = rng.standard_normal(n_classes) * 0.1

    def layers(self):
        return ["conv1", "conv2"]

    def _forward(self, image):
        x = np.asarray(image, dtype=np.float64)[None]
        a1 = np.tanh(conv2d(x, self.w1, self.b1))
        a2 = np.tanh(conv2d(a1, self.w2, self.b2))
        scores = self.wh @ a2.mean(axis=(1, 2)) + self.bh
        return a1, a2, scores

    def forward(self, image) -> np.ndarray:
        return self._forward(image)[2]

    def score_from_activations(self, acts, target_class: int, layer: str) -> float:
        if layer == "conv1":
            a2 = np.tanh(conv2d(acts, self.w2, self.b2))
        elif layer == "conv2":
            a2 = acts
        else:
            raise CamError(f"unknown layer {layer!r}")
        return float(self.wh[target_class] @ a2.mean(axis=(1, 2)) + self.bh[target_class])

    def activations_and_gradients(self, image, target_class: int, layer: str):
        a1, a2, _ = self._forward(image)
        spatial = a2.shape[1] * a2.shape[2]
        da2 = np.broadcast_to(
            self.wh[target_class][:, None, None] / spatial, a2.shape
        ).copy()
        if layer == "conv2":
            return a2, da2
        if layer == "conv1":
            dz2 = da2 * (1.0 - a2**2)
            da1 = conv2d_input_grad(dz2, self.w2, a1.shape)
            return a1, da1
        raise CamError(f"unknown layer {layer!r}")


class MeanScoreModel:
    """Single-channel model whose class score is the mean of a fixed
    activation map; the gradient is exactly 1/(h*w) everywhere."""

    def __init__(self, activation_map: np.ndarray):
        self.map = np.asarray(activation_map, dtype=np.float64)

    def layers(self):
        return ["map"]

    def forward(self, image):
        return np.array([self.map.mean()])

    def score_from_activations(self, acts, target_class, layer):
        return float(acts.mean())

    def activations_and_gradients(self, image, target_class, layer):
        h, w = self.map.shape
        acts = self.map[None]
        grads = np.full((1, h, w), 1.0 / (h * w))
        return acts, grads


class ConstantScoreModel:
    """Score independent of the layer activations: gradients are all zero."""

    def __init__(self, activation_map: np.ndarray):
        self.map = np.asarray(activation_map, dtype=np.float64)

    def layers(self):
        return ["map"]

    def forward(self, image):
        return np.array([1.0])

    def score_from_activations(self, acts, target_class, layer):
        return 1.0

    def activations_and_gradients(self, image, target_class, layer):
        return self.map[None], np.zeros_like(self.map)[None]
