"""Candidate text regions: segmentation, region extraction and suitability filtering."""

from __future__ import annotations

from dataclasses import dataclass, field

import cv2
import numpy as np
from scipy import ndimage

from .errors import ValidationError

UCM_THRESHOLD = 0.11

FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


@dataclass(frozen=True)
class SegmentMap:
    labels: np.ndarray  # H x W int32, values in [0, region_count)
    region_count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass(frozen=True)
class Region:
    label: int
    mask: np.ndarray = field(repr=False)
    area_px: int
    contour: np.ndarray = field(repr=False)  # (N, 2) x, y
    bbox: tuple[int, int, int, int]  # x, y, w, h


@dataclass(frozen=True)
class RegionFilterConfig:
    min_area_px: float = 6000.0
    max_aspect_ratio: float = 8.0
    max_normal_view_angle_deg: float = 75.0
    max_texture_score: float = 0.03
    # "frontoparallel" measures aspect on the rectified rectangle, "image" on the raw contour
    aspect_frame: str = "frontoparallel"

    def __post_init__(self):
        for name in ("min_area_px", "max_aspect_ratio", "max_normal_view_angle_deg", "max_texture_score"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.aspect_frame not in ("frontoparallel", "image"):
            raise ValidationError(f"unknown aspect_frame {self.aspect_frame!r}")

    @classmethod
    def scaled_to(cls, height: int, width: int, **overrides) -> "RegionFilterConfig":
        """Defaults with the area threshold rescaled from the 512x512 reference size."""
        area = overrides.pop("min_area_px", 6000.0 * (height * width) / (512.0 * 512.0))
        return cls(min_area_px=area, **overrides)


def _assign_boundary(labels: np.ndarray) -> np.ndarray:
    """Give every zero pixel the label most common among its 4-neighbours.

    Ties go to the lowest label. Pixels with no labelled neighbour wait for a
    later sweep; sweeps are synchronous so the result is order independent.
    """
    labels = labels.copy()
    while True:
        todo = labels == 0
        if not todo.any():
            return labels
        padded = np.pad(labels, 1)
        ys, xs = np.nonzero(todo)
        neigh = np.stack([
            padded[ys, xs + 1], padded[ys + 2, xs + 1],
            padded[ys + 1, xs], padded[ys + 1, xs + 2],
        ], axis=1).astype(np.int64)
        counts = (neigh[:, :, None] == neigh[:, None, :]).sum(axis=2)
        counts[neigh == 0] = 0
        best = counts.max(axis=1)
        ready = best > 0
        if not ready.any():
            raise RuntimeError("boundary assignment stalled")
        # among the most frequent candidates take the lowest label
        big = np.iinfo(np.int64).max
        cand = np.where(counts == best[:, None], neigh, big)
        choice = cand.min(axis=1)
        labels[ys[ready], xs[ready]] = choice[ready]


def threshold_ucm(ucm, tau: float = UCM_THRESHOLD) -> SegmentMap:
    """Segment by cutting the contour hierarchy at boundary strength ``tau``.

    Pixels with strength <= tau form 4-connected components; stronger boundary
    pixels are then absorbed by the neighbouring component with the most
    adjacent members so that the labels partition the image.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"tau must lie in [0, 1], got {tau}")
    ucm = np.asarray(ucm, dtype=np.float64)
    if ucm.ndim != 2 or ucm.size == 0:
        raise ValidationError("ucm must be a non-empty 2-D raster")
    interior = ucm <= tau
    comp, n = ndimage.label(interior, structure=FOUR_CONNECTED)
    if n == 0:
        return SegmentMap(np.zeros(ucm.shape, np.int32), 1)
    comp = _assign_boundary(comp)
    return SegmentMap((comp - 1).astype(np.int32), int(n))


def fallback_segment(image, scale_param: float = 300.0, sigma: float = 0.5,
                     min_size: int = 200) -> SegmentMap:
    """Graph-based region merging for images without a contour hierarchy."""
    from skimage.measure import label as cc_label
    from skimage.segmentation import felzenszwalb

    image = np.asarray(image)
    if image.size == 0:
        raise ValidationError("empty image")
    img = image.astype(np.float64)
    if image.dtype == np.uint8:
        img /= 255.0
    seg = felzenszwalb(img, scale=scale_param, sigma=sigma, min_size=min_size,
                       channel_axis=-1 if img.ndim == 3 else None)
    # split any segment that is only 8-connected into its 4-connected parts
    relabelled = cc_label(seg, background=-1, connectivity=1) - 1
    return SegmentMap(relabelled.astype(np.int32), int(relabelled.max()) + 1)


def _outer_contour(mask: np.ndarray) -> np.ndarray:
    contours, _ = cv2.findContours(mask.astype(np.uint8), cv2.RETR_EXTERNAL, cv2.CHAIN_APPROX_NONE)
    best = max(contours, key=len)
    return best.reshape(-1, 2).astype(np.float64)


def extract_regions(segmap: SegmentMap, min_area_px: float = 0) -> list[Region]:
    """Materialize the regions of a segment map, optionally skipping small ones."""
    labels = segmap.labels
    areas = np.bincount(labels.ravel(), minlength=segmap.region_count)
    slices = ndimage.find_objects(labels + 1)
    out = []
    for k, sl in enumerate(slices):
        if sl is None or areas[k] < max(min_area_px, 1):
            continue
        mask = np.zeros(labels.shape, bool)
        mask[sl] = labels[sl] == k
        y0, x0 = sl[0].start, sl[1].start
        contour = _outer_contour(mask[sl]) + (x0, y0)
        bbox = (x0, y0, sl[1].stop - x0, sl[0].stop - y0)
        out.append(Region(k, mask, int(areas[k]), contour, bbox))
    return out


def third_derivative_energy(image) -> np.ndarray:
    """Per-pixel, per-channel magnitude of the third finite difference along x and y."""
    img = np.asarray(image, dtype=np.float64)
    if np.asarray(image).dtype == np.uint8:
        img = img / 255.0
    if img.ndim == 2:
        img = img[:, :, None]
    h, w = img.shape[:2]
    dx = np.diff(img, n=3, axis=1) if w >= 4 else np.zeros((h, 0, img.shape[2]))
    dy = np.diff(img, n=3, axis=0) if h >= 4 else np.zeros((0, w, img.shape[2]))
    # the stencil at j spans j..j+3; centre it on j+1 and extend edges
    dx = np.pad(dx, ((0, 0), (1, 2), (0, 0)), mode="edge") if dx.shape[1] else np.zeros_like(img)
    dy = np.pad(dy, ((1, 2), (0, 0), (0, 0)), mode="edge") if dy.shape[0] else np.zeros_like(img)
    return np.hypot(dx, dy)


def texture_score(image, mask, energy=None) -> float:
    mask = np.asarray(mask, bool)
    if not mask.any():
        raise ValidationError("texture_score needs a non-empty mask")
    if energy is None:
        energy = third_derivative_energy(image)
    return float(energy[mask].mean())


def filter_regions(regions, planes, cfg: RegionFilterConfig, image, cam=None, energy=None,
                   rects=None) -> list[Region]:
    """Keep regions that are large, not too elongated, not seen edge-on and not textured.

    ``planes`` is aligned with ``regions``; a ``None`` entry drops the region.
    ``rects`` may carry already-fitted fronto-parallel rectangles (same
    alignment) to avoid refitting.
    """
    from . import geometry

    image = np.asarray(image)
    if len(planes) != len(regions):
        raise ValidationError("planes must be aligned with regions")
    if cam is None:
        cam = geometry.CameraModel.default_for(*image.shape[:2])
    if energy is None:
        energy = third_derivative_energy(image)
    cos_limit = np.cos(np.deg2rad(cfg.max_normal_view_angle_deg))
    kept = []
    for i, (region, plane) in enumerate(zip(regions, planes)):
        if plane is None or region.area_px < cfg.min_area_px:
            continue
        if abs(plane.normal[2]) < cos_limit:
            continue
        if cfg.aspect_frame == "image":
            rect = geometry.fit_rectangle(region.contour)
        elif rects is not None and rects[i] is not None:
            rect = rects[i]
        else:
            H = geometry.frontoparallel_homography(plane, region, cam)
            rect = geometry.fit_rectangle(geometry.apply_homography(H, region.contour))
        if rect is None or rect.width / rect.height > cfg.max_aspect_ratio:
            continue
        if texture_score(image, region.mask, energy) > cfg.max_texture_score:
            continue
        kept.append(region)
    return kept
