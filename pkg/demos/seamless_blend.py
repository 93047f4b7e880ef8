"""Poisson blending versus alpha compositing on a gradient background.

The Poisson result keeps the source's edges but takes its low frequencies
from the destination, so the text picks up the background's shading.
"""

import sys

import cv2
import numpy as np

from scenetext.compose import BlendRequest, alpha_blend, poisson_blend

h, w = 120, 320
dst = np.dstack([np.linspace(0.2, 0.9, w)[None].repeat(h, 0)] * 3) * np.array([1.0, 0.8, 0.6])
ink = np.zeros((h, w), np.uint8)
cv2.putText(ink, "BLEND", (20, 90), cv2.FONT_HERSHEY_SIMPLEX, 3.0, 255, 8)
alpha = ink / 255.0
# dark blue ink on a pale card; only the card-to-ink edges survive blending
src = alpha[..., None] * np.array([0.1, 0.2, 0.9]) + (1 - alpha[..., None]) * 0.95

req = BlendRequest.from_glyphs(dst, src, alpha)
seamless = poisson_blend(req)
pasted = alpha_blend(req, alpha)
print("pixels changed:", int(req.mask.sum()), "of", h * w)
print("outside the mask identical:", np.array_equal(seamless[~req.mask], dst[~req.mask]))

out = sys.argv[1] if len(sys.argv) > 1 else "blend.png"
strip = (np.vstack([dst, pasted, seamless]).clip(0, 1) * 255).astype(np.uint8)
cv2.imwrite(out, cv2.cvtColor(strip, cv2.COLOR_RGB2BGR))
print("wrote", out)
