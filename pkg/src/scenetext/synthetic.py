"""Procedural scene bundles: piecewise-planar backgrounds with known depth and contours.

These stand in for photographs with predicted depth and gPb-UCM rasters
during desk-scale runs and tests. Each scene is a stack of convex facets,
each lying on its own 3-D plane with smooth shading, so the true region
partition, depth and plane normals are all known.
"""

from __future__ import annotations

import cv2
import numpy as np

from .geometry import CameraModel
from .scene import SceneBundle


def plane_depth(normal, z_center: float, cam: CameraModel, shape) -> np.ndarray:
    """Depth raster of the plane with ``normal`` seen at depth ``z_center`` on the principal ray."""
    h, w = shape
    n = np.asarray(normal, dtype=np.float64)
    n = n / np.linalg.norm(n)
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    dots = n[0] * (u - cam.cx) / cam.focal_px + n[1] * (v - cam.cy) / cam.focal_px + n[2]
    return z_center * n[2] / dots


def random_normal(rng: np.random.Generator, max_tilt_deg: float) -> np.ndarray:
    tilt = np.deg2rad(rng.uniform(0, max_tilt_deg))
    phi = rng.uniform(0, 2 * np.pi)
    return np.array([np.sin(tilt) * np.cos(phi), np.sin(tilt) * np.sin(phi), np.cos(tilt)])


def _random_facet(rng, h, w):
    cx, cy = rng.uniform(0.1 * w, 0.9 * w), rng.uniform(0.1 * h, 0.9 * h)
    rx, ry = rng.uniform(0.15, 0.4) * w, rng.uniform(0.12, 0.35) * h
    rot = rng.uniform(-0.4, 0.4)
    pts = np.array([[-rx, -ry], [rx, -ry], [rx, ry], [-rx, ry]])
    pts *= rng.uniform(0.8, 1.0, size=(4, 1))
    c, s = np.cos(rot), np.sin(rot)
    pts = pts @ np.array([[c, s], [-s, c]]) + (cx, cy)
    return np.round(pts).astype(np.int32)


def make_bundle(rng: np.random.Generator, size=(512, 512), n_facets: int = 5, max_tilt_deg: float = 40.0,
                textured_facets: int = 1, noise: float = 0.002, bundle_id: str = "synthetic") -> SceneBundle:
    """One procedural scene; facets later in the stack occlude earlier ones."""
    h, w = size
    cam = CameraModel.default_for(h, w)
    labels = np.zeros((h, w), np.int32)
    for k in range(1, n_facets + 1):
        facet = np.zeros((h, w), np.uint8)
        cv2.fillConvexPoly(facet, _random_facet(rng, h, w), 1)
        labels[facet > 0] = k

    image = np.zeros((h, w, 3))
    depth = np.zeros((h, w))
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    textured = set(rng.choice(np.arange(1, n_facets + 1), size=min(textured_facets, n_facets), replace=False))
    for k in range(n_facets + 1):
        sel = labels == k
        if not sel.any():
            continue
        normal = random_normal(rng, max_tilt_deg if k else 10.0)
        depth[sel] = plane_depth(normal, rng.uniform(4.0, 12.0) if k else 20.0, cam, (h, w))[sel]
        base = rng.uniform(0.15, 0.9, size=3)
        # smooth illumination: a gentle linear ramp across the facet
        gx, gy = rng.uniform(-0.25, 0.25, size=2)
        shade = 1.0 + gx * (u / w - 0.5) + gy * (v / h - 0.5)
        layer = base[None, None, :] * shade[..., None]
        if k in textured:
            layer = layer + rng.uniform(-0.25, 0.25, size=(h, w, 1))
        image[sel] = layer[sel]
    image += rng.normal(0.0, noise, size=image.shape)
    image = np.clip(np.round(image * 255), 0, 255).astype(np.uint8)

    edge = np.zeros((h, w), bool)
    edge[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    edge[:-1, :] |= labels[:-1, :] != labels[1:, :]
    ucm = np.where(edge, rng.uniform(0.3, 1.0), 0.0) * edge
    ucm = ucm + rng.uniform(0.0, 0.05, size=(h, w)) * ~edge
    return SceneBundle(image, depth, ucm, bundle_id)


def make_bundles(n: int, seed: int = 0, size=(512, 512), **kwargs) -> list[SceneBundle]:
    rng = np.random.default_rng(seed)
    return [make_bundle(rng, size=size, bundle_id=f"synthetic_{i:04d}", **kwargs) for i in range(n)]
