"""Class-activation heatmaps from the bundled two-conv toy model.

The toy model is untrained; the point here is the mechanics: channel
weights are spatial means of the class-score gradients, the heatmap is the
ReLU'd weighted activation sum upsampled to the input. Swap in any adapter
that exposes activations_and_gradients() to inspect a real classifier.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from fgdata.gradcam import MeanScoreModel, TinyConvNet, grad_cam
from fgdata.images import load_image
from fgdata.synthetic import make_corpus

out_dir = Path(__file__).parent / "out" / "gradcam"
out_dir.mkdir(parents=True, exist_ok=True)

info = make_corpus(out_dir / "source", n_clean=6, n_classes=3, seed=9, with_failures=False)
model = TinyConvNet(channels=(4, 6), n_classes=3, seed=1)

records = info.manifest.records[:4]
fig, axes = plt.subplots(2, len(records), figsize=(3 * len(records), 6))
for col, rec in enumerate(records):
    pixels = load_image(info.root / rec.source_path).pixels
    gray = pixels.astype(np.float64).mean(axis=2) / 255.0
    predicted = int(np.argmax(model.forward(gray)))
    comp = grad_cam(model, gray, target_class=predicted, layer="conv2")
    axes[0, col].imshow(pixels)
    axes[0, col].set_title(rec.class_name, fontsize=9)
    axes[1, col].imshow(pixels)
    axes[1, col].imshow(comp.heatmap, cmap="jet", alpha=0.45)
    for row in (0, 1):
        axes[row, col].set_xticks([])
        axes[row, col].set_yticks([])
    print(f"{rec.record_id}: degenerate={comp.degenerate}, "
          f"top weight channel {int(np.argmax(np.abs(comp.channel_weights)))}")
axes[0, 0].set_ylabel("input")
axes[1, 0].set_ylabel("cam overlay")
fig.tight_layout()
fig.savefig(out_dir / "cam_grid.png", dpi=110)
print(f"figure -> {out_dir / 'cam_grid.png'}")

# sanity anchor: a model whose score is the mean of its activation map has
# a flat gradient, so the heatmap is just the normalized ReLU'd map
act = np.random.default_rng(3).standard_normal((8, 8))
comp = grad_cam(MeanScoreModel(act), np.zeros((8, 8)), 0, "map")
expected = np.maximum(act, 0)
expected = (expected - expected.min()) / (expected.max() - expected.min())
print(f"mean-score toy matches analytic heatmap: {np.array_equal(comp.heatmap, expected)}")
