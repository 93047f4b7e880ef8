"""Grid targets: encode word boxes into a stride-16 grid, decode them, suppress duplicates.

A regressor trained on these grids predicts one box per cell. Decoding a
prediction at several input scales gives overlapping boxes, which greedy
suppression folds back into one box per word.
"""

import numpy as np

from scenetext.dettarget import DetectionBox, decode_grid, encode_targets, grid_loss, multiscale_merge

words = [[20.0, 30.0, 90.0, 24.0], [130.0, 40.0, 60.0, 20.0], [40.0, 150.0, 120.0, 40.0]]
target = encode_targets({"instances": [{"word_bboxes": words}]}, (224, 224))
print("grid", target.cells.shape, "text cells", int(target.cells[..., 0].sum()))

for b in decode_grid(target, threshold=0.5):
    print(f"  centre ({b.x:.1f}, {b.y:.1f}) size {b.w:.0f}x{b.h:.0f}")

# a noisy "prediction": small errors on every cell
rng = np.random.default_rng(0)
pred = type(target)(target.cells + rng.normal(0, 0.02, target.cells.shape), target.delta, target.image_size)
print("loss on the noisy prediction", round(grid_loss(pred, target), 5))

# the same word found at full and half resolution
full = [DetectionBox(65, 42, 90, 24, score=0.9)]
half = [DetectionBox(33, 21.5, 44, 12, score=0.7)]
merged = multiscale_merge({1.0: full, 0.5: half})
print("after multiscale merge:", [(b.x, b.y, b.w, b.h, b.score) for b in merged])
