"""Depth back-projection, planar facet fitting and fronto-parallel rectification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import ValidationError

MIN_INLIER_FRACTION = 0.6


@dataclass(frozen=True)
class CameraModel:
    focal_px: float
    cx: float
    cy: float

    def __post_init__(self):
        if not self.focal_px > 0:
            raise ValidationError("focal length must be positive")

    @classmethod
    def default_for(cls, height: int, width: int) -> "CameraModel":
        return cls(float(max(height, width)), width / 2.0, height / 2.0)

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.focal_px, 0, self.cx], [0, self.focal_px, self.cy], [0, 0, 1.0]])


@dataclass(frozen=True)
class Plane:
    normal: np.ndarray  # unit, normal[2] >= 0
    offset: float  # n . X = offset
    inlier_fraction: float


@dataclass(frozen=True)
class RotatedRect:
    center: tuple[float, float]
    width: float
    height: float
    angle_rad: float

    def corners(self) -> np.ndarray:
        c, s = np.cos(self.angle_rad), np.sin(self.angle_rad)
        u = np.array([c, s]) * self.width / 2
        v = np.array([-s, c]) * self.height / 2
        ctr = np.asarray(self.center)
        return np.array([ctr - u - v, ctr + u - v, ctr + u + v, ctr - u + v])


def backproject(u, v, depth, cam: CameraModel) -> np.ndarray:
    """Pinhole back-projection; vectorizes over array inputs, returning (..., 3)."""
    depth = np.asarray(depth, dtype=np.float64)
    if np.any(depth <= 0):
        raise ValidationError("depth must be positive")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    x = (u - cam.cx) / cam.focal_px * depth
    y = (v - cam.cy) / cam.focal_px * depth
    return np.stack(np.broadcast_arrays(x, y, depth), axis=-1)


def project(points, cam: CameraModel) -> np.ndarray:
    p = np.asarray(points, dtype=np.float64)
    return np.stack([cam.focal_px * p[..., 0] / p[..., 2] + cam.cx,
                     cam.focal_px * p[..., 1] / p[..., 2] + cam.cy], axis=-1)


def _canonical(normal: np.ndarray, offset: float) -> tuple[np.ndarray, float]:
    if normal[2] < 0:
        return -normal, -offset
    return normal, offset


def _lsq_plane(pts: np.ndarray) -> tuple[np.ndarray, float]:
    centroid = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    n = vt[-1]
    n = n / np.linalg.norm(n)
    return n, float(n @ centroid)


def fit_plane_ransac(region, depth, cam: CameraModel, iters: int = 200, inlier_tol: float | None = None,
                     rng: np.random.Generator | None = None, max_points: int = 2000,
                     min_inlier_fraction: float = MIN_INLIER_FRACTION) -> Plane | None:
    """Fit one plane to the back-projected depth of a region.

    Scores ``iters`` random 3-point hypotheses by inlier count, refines the
    winner by least squares on its inliers, and returns ``None`` when fewer
    than ``min_inlier_fraction`` of the points agree. ``inlier_tol`` defaults
    to 1% of the region's median depth. Regions larger than ``max_points``
    are evaluated on a random subset of their pixels.
    """
    if region.area_px < 3:
        raise ValidationError("plane fitting needs at least 3 pixels")
    rng = np.random.default_rng() if rng is None else rng
    depth = np.asarray(depth, dtype=np.float64)
    ys, xs = np.nonzero(region.mask)
    if len(ys) > max_points:
        pick = np.sort(rng.choice(len(ys), size=max_points, replace=False))
        ys, xs = ys[pick], xs[pick]
    z = depth[ys, xs]
    pts = backproject(xs, ys, z, cam)
    n_pts = len(pts)
    tol = 0.01 * float(np.median(z)) if inlier_tol is None else float(inlier_tol)

    # draw hypotheses, redrawing degenerate (repeated or collinear) triples
    scale = float(np.ptp(pts, axis=0).max()) or 1.0
    normals = np.zeros((iters, 3))
    anchors = np.zeros((iters, 3))
    pending = np.arange(iters)
    for _ in range(50):
        if len(pending) == 0:
            break
        tri = rng.integers(0, n_pts, size=(len(pending), 3))
        p0, p1, p2 = pts[tri[:, 0]], pts[tri[:, 1]], pts[tri[:, 2]]
        nrm = np.cross(p1 - p0, p2 - p0)
        length = np.linalg.norm(nrm, axis=1)
        good = length > 1e-12 * scale * scale
        normals[pending[good]] = nrm[good] / length[good, None]
        anchors[pending[good]] = p0[good]
        pending = pending[~good]
    valid = np.ones(iters, bool)
    valid[pending] = False
    if not valid.any():
        return None
    normals, anchors = normals[valid], anchors[valid]
    offsets = np.einsum("ij,ij->i", normals, anchors)
    resid = np.abs(pts @ normals.T - offsets)
    counts = (resid <= tol).sum(axis=0)
    best = int(np.argmax(counts))
    inliers = resid[:, best] <= tol

    n, d = normals[best], offsets[best]
    for _ in range(2):
        if inliers.sum() < 3:
            break
        n, d = _lsq_plane(pts[inliers])
        inliers = np.abs(pts @ n - d) <= tol
    frac = float(inliers.mean())
    if frac < min_inlier_fraction:
        return None
    n, d = _canonical(n, d)
    return Plane(n, float(d), frac)


def _rotation_onto_z(n: np.ndarray) -> np.ndarray | None:
    z = np.array([0.0, 0.0, 1.0])
    axis = np.cross(n, z)
    s = np.linalg.norm(axis)
    if s < 1e-6 and n[2] > 0:
        return None
    axis = axis / s
    c = float(n @ z)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + s * k + (1 - c) * (k @ k)


def normalize_homography(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=np.float64)
    if H[2, 2] != 0:
        H = H / H[2, 2]
    if abs(np.linalg.det(H)) <= 1e-12:
        raise ValidationError("homography is singular")
    return H


def frontoparallel_homography(plane: Plane, region, cam: CameraModel) -> np.ndarray:
    """Image-to-rectified homography induced by turning the plane to face the camera.

    The plane is rotated about ``normal x z`` through the 3-D point seen at the
    region's pixel centroid, so that point keeps its depth and the rectified
    region keeps roughly its on-screen scale.
    """
    n = np.asarray(plane.normal, dtype=np.float64)
    R = _rotation_onto_z(n)
    if R is None:
        return np.eye(3)
    ys, xs = np.nonzero(region.mask)
    ray = np.array([(xs.mean() - cam.cx) / cam.focal_px, (ys.mean() - cam.cy) / cam.focal_px, 1.0])
    denom = float(n @ ray)
    if abs(plane.offset) < 1e-12 or abs(denom) < 1e-12:
        raise ValidationError("plane passes through the camera centre")
    p0 = ray * plane.offset / denom
    t = p0 - R @ p0
    K = cam.K
    H = K @ (R + np.outer(t, n) / plane.offset) @ np.linalg.inv(K)
    return normalize_homography(H)


def apply_homography(H, points) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    hom = np.hstack([pts, np.ones((len(pts), 1))]) @ np.asarray(H, dtype=np.float64).T
    return hom[:, :2] / hom[:, 2:3]


def polygon_area(points) -> float:
    p = np.asarray(points, dtype=np.float64)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def convex_hull(points) -> np.ndarray | None:
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    if len(pts) < 3:
        return None
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return None
    return pts[hull.vertices]


def _wrap_half_turn(a: float) -> float:
    """Map an undirected line angle into (-pi/2, pi/2]."""
    a = (a + np.pi / 2) % np.pi - np.pi / 2
    return np.pi / 2 if a <= -np.pi / 2 + 1e-15 else a


def fit_rectangle(contour) -> RotatedRect | None:
    """Minimum-area enclosing rectangle, with ``width`` along its longer side.

    One side of the optimal rectangle is collinear with a hull edge, so every
    hull edge direction is tried. Returns ``None`` for degenerate contours.
    """
    pts = np.asarray(contour, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 3:
        raise ValidationError("a contour needs at least 3 vertices")
    hull = convex_hull(pts)
    if hull is None:
        return None
    edges = np.roll(hull, -1, axis=0) - hull
    angles = np.arctan2(edges[:, 1], edges[:, 0])
    c, s = np.cos(angles), np.sin(angles)
    # hull coordinates in each edge-aligned frame: (n_edges, n_pts)
    along = c[:, None] * hull[None, :, 0] + s[:, None] * hull[None, :, 1]
    across = -s[:, None] * hull[None, :, 0] + c[:, None] * hull[None, :, 1]
    ext_a = along.max(axis=1) - along.min(axis=1)
    ext_b = across.max(axis=1) - across.min(axis=1)
    area = ext_a * ext_b
    k = int(np.argmin(area))
    if area[k] <= 1e-12:
        return None
    theta = angles[k]
    mid_a = 0.5 * (along[k].max() + along[k].min())
    mid_b = 0.5 * (across[k].max() + across[k].min())
    center = (float(c[k] * mid_a - s[k] * mid_b), float(s[k] * mid_a + c[k] * mid_b))
    a, b = float(ext_a[k]), float(ext_b[k])
    if b > a * (1 + 1e-9):
        a, b = b, a
        theta += np.pi / 2
    angle = _wrap_half_turn(theta)
    if abs(a - b) <= 1e-9 * a and abs(angle) > np.pi / 4:
        # square: both sides qualify as width, prefer the one nearer horizontal
        angle = _wrap_half_turn(angle + np.pi / 2)
    return RotatedRect(center, a, b, float(angle))


def rotation_about(center, angle_rad: float) -> np.ndarray:
    """3x3 homogeneous rotation by ``angle_rad`` about ``center``."""
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    cx, cy = center
    return np.array([[c, -s, cx - c * cx + s * cy], [s, c, cy - s * cx - c * cy], [0, 0, 1.0]])


def rectify_region(plane: Plane, region, cam: CameraModel):
    """Rectifying homography whose frame has the fitted rectangle axis-aligned.

    Returns ``(H, rect)`` where ``H`` maps image pixels to the rectified frame
    and ``rect`` is the rectangle in that frame (``angle_rad == 0``, longer
    side horizontal), or ``(H, None)`` if no rectangle fits.
    """
    H = frontoparallel_homography(plane, region, cam)
    rect = fit_rectangle(apply_homography(H, region.contour))
    if rect is None:
        return H, None
    H = normalize_homography(rotation_about(rect.center, -rect.angle_rad) @ H)
    return H, RotatedRect(rect.center, rect.width, rect.height, 0.0)
