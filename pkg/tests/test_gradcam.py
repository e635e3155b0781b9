import numpy as np
import pytest

from fgdata.gradcam import (
    CamError,
    ConstantScoreModel,
    MeanScoreModel,
    TinyConvNet,
    bilinear_resize,
    cam_from_arrays,
    conv2d,
    conv2d_input_grad,
    grad_cam,
)


def finite_difference_grads(model, acts, target, layer, eps=1e-5):
    grads = np.zeros_like(acts)
    it = np.nditer(acts, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        plus = acts.copy()
        plus[idx] += eps
        minus = acts.copy()
        minus[idx] -= eps
        grads[idx] = (
            model.score_from_activations(plus, target, layer)
            - model.score_from_activations(minus, target, layer)
        ) / (2 * eps)
        it.iternext()
    return grads


@pytest.mark.parametrize("layer", ["conv1", "conv2"])
@pytest.mark.parametrize("seed", [0, 1])
def test_gradients_match_finite_differences(layer, seed):
    model = TinyConvNet(seed=seed)
    image = np.random.default_rng(seed + 10).standard_normal((12, 12))
    acts, analytic = model.activations_and_gradients(image, target_class=1, layer=layer)
    fd = finite_difference_grads(model, acts, 1, layer)
    scale = max(np.abs(analytic).max(), 1e-12)
    rel_err = np.abs(analytic - fd).max() / scale
    assert rel_err <= 1e-4, f"{layer} seed {seed}: rel err {rel_err:.2e}"


def test_conv_backward_matches_forward_fd():
    rng = np.random.default_rng(2)
    w = rng.standard_normal((2, 3, 3, 3))
    x = rng.standard_normal((3, 7, 7))
    dout = rng.standard_normal((2, 5, 5))
    din = conv2d_input_grad(dout, w, x.shape)
    # directional derivative check: <din, v> == d/dt sum(conv(x+tv) * dout)
    v = rng.standard_normal(x.shape)
    eps = 1e-6
    b = np.zeros(2)
    f = lambda xx: float((conv2d(xx, w, b) * dout).sum())
    fd = (f(x + eps * v) - f(x - eps * v)) / (2 * eps)
    assert fd == pytest.approx(float((din * v).sum()), rel=1e-6)


def test_mean_score_model_analytic():
    # 4x4 map: spatial size 16 is a power of two, so alpha and the
    # normalization are exact in floating point
    act = np.array(
        [
            [1.0, -2.0, 3.0, 0.5],
            [0.0, 4.0, -1.0, 2.0],
            [2.5, 1.5, -3.0, 1.0],
            [0.25, -0.5, 2.0, 3.5],
        ]
    )
    model = MeanScoreModel(act)
    comp = grad_cam(model, np.zeros((4, 4)), target_class=0, layer="map")
    assert np.all(comp.gradients == 1.0 / 16.0)
    assert comp.channel_weights[0] == 1.0 / 16.0
    relu = np.maximum(act, 0.0)
    expected = (relu - relu.min()) / (relu.max() - relu.min())
    assert np.array_equal(comp.heatmap, expected)
    assert not comp.degenerate
    assert comp.heatmap.min() == 0.0 and comp.heatmap.max() == 1.0


def test_zero_gradient_degenerate_all_zero():
    act = np.random.default_rng(3).standard_normal((6, 6))
    comp = grad_cam(ConstantScoreModel(act), np.zeros((6, 6)), 0, "map")
    assert comp.degenerate
    assert np.all(comp.heatmap == 0.0)
    assert np.all(comp.gradients == 0.0)


def test_scale_invariance_dyadic_exact():
    rng = np.random.default_rng(4)
    acts = rng.standard_normal((3, 5, 5))
    grads = rng.standard_normal((3, 5, 5))
    base = cam_from_arrays(acts, grads, 5, 5)
    for c in (2.0, 0.25, 64.0):
        scaled = cam_from_arrays(acts * c, grads / c, 5, 5)
        assert np.array_equal(base.heatmap, scaled.heatmap)


def test_scale_invariance_arbitrary_close():
    rng = np.random.default_rng(5)
    acts = rng.standard_normal((2, 6, 6))
    grads = rng.standard_normal((2, 6, 6))
    base = cam_from_arrays(acts, grads, 6, 6)
    for c in (3.0, 0.7, 11.3):
        scaled = cam_from_arrays(acts * c, grads / c, 6, 6)
        assert np.allclose(base.heatmap, scaled.heatmap, atol=1e-12)


def test_heatmap_upsampled_to_input_resolution():
    model = TinyConvNet(seed=1)
    image = np.random.default_rng(6).standard_normal((14, 14))
    comp = grad_cam(model, image, 0, "conv2")
    assert comp.heatmap.shape == (14, 14)
    assert comp.activations.shape[1:] == (10, 10)  # two valid 3x3 convs
    if not comp.degenerate:
        assert comp.heatmap.min() == 0.0 and comp.heatmap.max() == 1.0


def test_unknown_layer_rejected():
    model = TinyConvNet()
    with pytest.raises(CamError, match="fc"):
        grad_cam(model, np.zeros((10, 10)), 0, "fc")


def test_bilinear_resize_identity_and_linearity():
    rng = np.random.default_rng(7)
    g = rng.standard_normal((4, 5))
    assert np.array_equal(bilinear_resize(g, 4, 5), g)
    up = bilinear_resize(g, 9, 11)
    # corner alignment
    assert up[0, 0] == g[0, 0]
    assert up[-1, -1] == g[-1, -1]
    up2 = bilinear_resize(2.0 * g, 9, 11)
    assert np.allclose(up2, 2.0 * up)


def test_cam_shape_validation():
    with pytest.raises(CamError):
        cam_from_arrays(np.zeros((2, 3, 3)), np.zeros((2, 4, 3)), 3, 3)
    with pytest.raises(CamError):
        cam_from_arrays(np.zeros((3, 3)), np.zeros((3, 3)), 3, 3)
