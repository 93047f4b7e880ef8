"""Text colour palettes learned from word crops, and colour selection per region."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import IngestionError, ValidationError

log = logging.getLogger(__name__)

# sRGB primaries; the D65 white is taken as the image of RGB white so that it maps to a = b = 0
_RGB2XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_WHITE = _RGB2XYZ.sum(axis=1)
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)
_EPS = 216 / 24389
_KAPPA = 24389 / 27

BORDER_PROB = 0.2
LIGHTNESS_SHIFT = 30.0


def rgb_to_lab(rgb) -> np.ndarray:
    """sRGB in [0, 1] (any leading shape, last axis 3) to CIE L*a*b* under D65."""
    c = np.clip(np.asarray(rgb, dtype=np.float64), 0.0, 1.0)
    lin = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    xyz = lin @ _RGB2XYZ.T / _WHITE
    f = np.where(xyz > _EPS, np.cbrt(xyz), (_KAPPA * xyz + 16) / 116)
    L = 116 * f[..., 1] - 16
    a = 500 * (f[..., 0] - f[..., 1])
    b = 200 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def lab_to_rgb(lab) -> np.ndarray:
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16) / 116
    fx = fy + lab[..., 1] / 500
    fz = fy - lab[..., 2] / 200
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = np.where(f ** 3 > _EPS, f ** 3, (116 * f - 16) / _KAPPA) * _WHITE
    lin = xyz @ _XYZ2RGB.T
    lin = np.clip(lin, 0.0, 1.0)
    rgb = np.where(lin <= 0.0031308, 12.92 * lin, 1.055 * lin ** (1 / 2.4) - 0.055)
    return np.clip(rgb, 0.0, 1.0)


@dataclass(frozen=True)
class ColorPair:
    fg: tuple[float, float, float]  # Lab
    bg: tuple[float, float, float]

    def __post_init__(self):
        if np.linalg.norm(np.subtract(self.fg, self.bg)) <= 1e-6:
            raise ValidationError("foreground and background colours coincide")


@dataclass(frozen=True)
class Palette:
    pairs: tuple[ColorPair, ...]

    def __post_init__(self):
        if not self.pairs:
            raise ValidationError("palette is empty")

    def bg_array(self) -> np.ndarray:
        return np.array([p.bg for p in self.pairs], dtype=np.float64)

    def save(self, path) -> None:
        """Text table: one pair per line, ``fgL fga fgb bgL bga bgb``."""
        rows = np.array([tuple(p.fg) + tuple(p.bg) for p in self.pairs])
        np.savetxt(path, rows, fmt="%.6f")

    @classmethod
    def load(cls, path) -> "Palette":
        try:
            rows = np.loadtxt(path, ndmin=2)
        except (OSError, ValueError) as exc:
            raise IngestionError(f"cannot read palette {path}: {exc}") from exc
        if rows.shape[1] != 6:
            raise IngestionError(f"{path}: expected 6 columns, found {rows.shape[1]}")
        return cls(tuple(ColorPair(tuple(r[:3]), tuple(r[3:])) for r in rows))


def _hartigan(pts, centers, assign, max_moves: int = 1000):
    """Single-point moves that strictly lower inertia; escapes Lloyd fixed points."""
    counts = np.bincount(assign, minlength=2).astype(np.float64)
    for _ in range(max_moves):
        d = ((pts[:, None, :] - centers[None]) ** 2).sum(axis=2)
        own = assign
        other = 1 - assign
        n_own, n_other = counts[own], counts[other]
        with np.errstate(divide="ignore", invalid="ignore"):
            stay = np.where(n_own > 1, n_own / (n_own - 1) * d[np.arange(len(pts)), own], np.inf)
        move = n_other / (n_other + 1) * d[np.arange(len(pts)), other]
        gain = stay - move
        i = int(np.argmax(gain))
        if not gain[i] > 1e-12 * (1.0 + stay[i]):
            break
        a, b = own[i], other[i]
        centers[a] = (centers[a] * counts[a] - pts[i]) / (counts[a] - 1)
        centers[b] = (centers[b] * counts[b] + pts[i]) / (counts[b] + 1)
        counts[a] -= 1
        counts[b] += 1
        assign[i] = b
    for k in range(2):
        centers[k] = pts[assign == k].mean(axis=0)
    return centers, assign


EXACT_MAX_COLORS = 12


def _exact_two_means(pts: np.ndarray):
    """Globally optimal split of a few distinct colours, weighted by multiplicity."""
    uniq, inverse, weight = np.unique(pts, axis=0, return_inverse=True, return_counts=True)
    m = len(uniq)
    w = weight.astype(np.float64)
    # every subset that excludes the last colour, so each split is seen once
    masks = np.arange(1, 2 ** (m - 1))
    S = ((masks[:, None] >> np.arange(m)[None, :]) & 1).astype(np.float64)
    n1 = S @ w
    n0 = w.sum() - n1
    s1 = S @ (w[:, None] * uniq)
    s0 = (w[:, None] * uniq).sum(axis=0) - s1
    inertia = (w * (uniq ** 2).sum(axis=1)).sum() - (s1 ** 2).sum(axis=1) / n1 - (s0 ** 2).sum(axis=1) / n0
    k = int(np.argmin(inertia))
    centers = np.stack([s0[k] / n0[k], s1[k] / n1[k]])
    assign = S[k].astype(np.int64)[inverse.ravel()]
    return centers, assign


def two_means(points: np.ndarray, rng: np.random.Generator, iters: int = 20, n_init: int = 4):
    """2-means over colour points; returns ``(centroids, assignment)``.

    Crops with at most ``EXACT_MAX_COLORS`` distinct colours are split
    exactly. Otherwise Lloyd's iterations from k-means++ seeds (best of
    ``n_init`` runs by inertia, plus one principal-axis start), each run
    finished with Hartigan single-point moves.

    ``None`` if the points hold fewer than two distinct values.
    """
    pts = np.asarray(points, dtype=np.float64)
    if not (pts != pts[0]).any():
        return None
    if len(np.unique(pts, axis=0)) <= EXACT_MAX_COLORS:
        return _exact_two_means(pts)
    best = None
    for run in range(n_init + 1):
        if run == n_init:
            # extra deterministic start: split at the mean along the principal axis
            centred = pts - pts.mean(axis=0)
            axis = np.linalg.svd(centred, full_matrices=False)[2][0]
            side = centred @ axis > 0
            if side.all() or not side.any():
                continue
            centers = np.stack([pts[~side].mean(axis=0), pts[side].mean(axis=0)])
        else:
            first = pts[rng.integers(len(pts))]
            d2 = ((pts - first) ** 2).sum(axis=1)
            if d2.sum() <= 0:
                first = pts[np.argmax(((pts - pts.mean(axis=0)) ** 2).sum(axis=1))]
                d2 = ((pts - first) ** 2).sum(axis=1)
            second = pts[rng.choice(len(pts), p=d2 / d2.sum())]
            centers = np.stack([first, second])
        assign = None
        for _ in range(iters):
            dist = ((pts[:, None, :] - centers[None]) ** 2).sum(axis=2)
            new = np.argmin(dist, axis=1)
            if assign is not None and np.array_equal(new, assign):
                break
            assign = new
            for k in range(2):
                if np.any(assign == k):
                    centers[k] = pts[assign == k].mean(axis=0)
        if np.all(np.bincount(assign, minlength=2) > 0):
            centers, assign = _hartigan(pts, centers, assign)
        inertia = ((pts - centers[assign]) ** 2).sum()
        if best is None or inertia < best[0]:
            best = (inertia, centers.copy(), assign.copy())
    if best is None:
        return None
    return best[1], best[2]


def crop_color_pair(crop, rng: np.random.Generator) -> ColorPair | None:
    """Split a word crop's pixels into two Lab clusters; the bigger one is background."""
    arr = np.asarray(crop)
    rgb = arr[..., :3].astype(np.float64)
    if arr.dtype == np.uint8:
        rgb /= 255.0
    lab = rgb_to_lab(rgb.reshape(-1, 3))
    res = two_means(lab, rng)
    if res is None:
        return None
    centers, assign = res
    counts = np.bincount(assign, minlength=2)
    bg = int(np.argmax(counts))
    fg = 1 - bg
    if np.linalg.norm(centers[0] - centers[1]) <= 1e-6:
        return None
    return ColorPair(tuple(map(float, centers[fg])), tuple(map(float, centers[bg])))


def learn_palette(crops, rng: np.random.Generator) -> Palette:
    pairs = []
    for i, crop in enumerate(crops):
        pair = crop_color_pair(crop, rng)
        if pair is None:
            log.warning("crop %d has a single colour; skipped", i)
            continue
        pairs.append(pair)
    return Palette(tuple(pairs))


def load_crops(directory) -> list[np.ndarray]:
    """Read every image in ``directory`` (sorted by name) as an RGB array."""
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise IngestionError(f"cannot list {directory}: {exc}") from exc
    crops = []
    for name in names:
        if not name.lower().endswith((".png", ".jpg", ".jpeg", ".bmp")):
            continue
        with Image.open(os.path.join(directory, name)) as im:
            crops.append(np.asarray(im.convert("RGB")))
    return crops


def select_pair(region_mean, palette: Palette) -> ColorPair:
    """Pair whose background is nearest (L2 in Lab) to the region colour; first on ties."""
    d = np.linalg.norm(palette.bg_array() - np.asarray(region_mean, dtype=np.float64), axis=1)
    return palette.pairs[int(np.argmin(d))]


@dataclass(frozen=True)
class BorderSpec:
    color: tuple[float, float, float]  # Lab
    rule: str  # "shift" or "mean"


def choose_decoration(fg, bg, rng: np.random.Generator, border_prob: float = BORDER_PROB,
                      shift: float = LIGHTNESS_SHIFT, mean_rule_prob: float = 0.5) -> BorderSpec | None:
    """Decide whether a text instance gets a border, and its colour.

    Exactly one draw is consumed when no border is chosen.
    """
    if rng.random() >= border_prob:
        return None
    fg = np.asarray(fg, dtype=np.float64)
    if rng.random() < mean_rule_prob:
        mid = 0.5 * (fg + np.asarray(bg, dtype=np.float64))
        return BorderSpec(tuple(map(float, mid)), "mean")
    sign = 1.0 if rng.random() < 0.5 else -1.0
    if not 0.0 <= fg[0] + sign * shift <= 100.0:
        sign = -sign  # shift the way that leaves room, so the border stays visible
    L = float(np.clip(fg[0] + sign * shift, 0.0, 100.0))
    return BorderSpec((L, float(fg[1]), float(fg[2])), "shift")
