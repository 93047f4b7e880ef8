"""From a depth map to a text rectangle, and from a crop to a colour pair.

RANSAC recovers the plane of a tilted board despite outliers in the depth.
The plane's fronto-parallel view gives the rectangle text is sized to.
Separately, 2-means in Lab splits a word crop into text and background colours.
"""

import numpy as np

from scenetext.chroma import crop_color_pair, rgb_to_lab, select_pair
from scenetext.geometry import CameraModel, fit_plane_ransac, rectify_region
from scenetext.resources import builtin_palette
from scenetext.segmentation import SegmentMap, extract_regions
from scenetext.synthetic import plane_depth

rng = np.random.default_rng(3)
shape = (120, 160)
cam = CameraModel.default_for(*shape)
normal = np.array([0.3, -0.1, 1.0])
normal /= np.linalg.norm(normal)
depth = plane_depth(normal, 6.0, cam, shape)
noise = rng.random(shape) < 0.2
depth[noise] = rng.uniform(2, 12, noise.sum())

labels = np.zeros(shape, np.int32)
labels[20:100, 30:130] = 1
region = [r for r in extract_regions(SegmentMap(labels, 2)) if r.label == 1][0]
plane = fit_plane_ransac(region, depth, cam, rng=rng)
err = np.degrees(np.arccos(abs(plane.normal @ normal)))
print(f"plane normal {np.round(plane.normal, 3)}, {err:.2f} deg from truth")

H, rect = rectify_region(plane, region, cam)
print(f"text rectangle {rect.width:.0f} x {rect.height:.0f} px in the rectified frame")

crop = np.zeros((16, 48, 3))
crop[:] = (0.95, 0.9, 0.2)
crop[5:11, 6:42] = (0.1, 0.1, 0.4)
pair = crop_color_pair(crop, rng)
print("crop pair (Lab):", np.round(pair.fg, 1), np.round(pair.bg, 1))
pick = select_pair(rgb_to_lab(np.array([0.3, 0.5, 0.3])), builtin_palette())
print("pair chosen for a green region:", np.round(pick.fg, 1), "on", np.round(pick.bg, 1))
