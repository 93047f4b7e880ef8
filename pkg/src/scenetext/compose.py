"""Gradient-domain text blending with a sine-transform Poisson solver."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import cv2
import numpy as np
from scipy.fft import dstn, idstn

from .errors import ValidationError

MASK_DILATION_PX = 2


class BlendMode(str, enum.Enum):
    POISSON = "poisson"
    ALPHA = "alpha"


@dataclass(frozen=True)
class BlendRequest:
    dst: np.ndarray  # H x W x C float in [0, 1]
    src: np.ndarray
    mask: np.ndarray  # H x W bool
    mode: BlendMode = BlendMode.POISSON

    def __post_init__(self):
        if self.dst.shape != self.src.shape or self.dst.shape[:2] != self.mask.shape:
            raise ValidationError("dst, src and mask must share H x W")

    @classmethod
    def from_glyphs(cls, dst, src, alpha, mode=BlendMode.POISSON, radius: int = MASK_DILATION_PX,
                    threshold: float = 0.05) -> "BlendRequest":
        """Blend mask = glyph support dilated by ``radius``, clamped off the image border."""
        mask = blend_mask(alpha, radius, threshold)
        return cls(np.asarray(dst, np.float64), np.asarray(src, np.float64), mask, BlendMode(mode))


def blend_mask(alpha, radius: int = MASK_DILATION_PX, threshold: float = 0.05) -> np.ndarray:
    support = np.asarray(alpha) > threshold
    if radius > 0:
        yy, xx = np.mgrid[-radius:radius + 1, -radius:radius + 1]
        disk = (xx ** 2 + yy ** 2 <= radius ** 2).astype(np.uint8)
        support = cv2.dilate(support.astype(np.uint8), disk) > 0
    support[0, :] = support[-1, :] = False
    support[:, 0] = support[:, -1] = False
    return support


def forward_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences; the last column of gx and last row of gy are zero."""
    img = np.asarray(img, dtype=np.float64)
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, :-1] = img[:, 1:] - img[:, :-1]
    gy[:-1] = img[1:] - img[:-1]
    return gx, gy


def divergence(vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    """Backward-difference divergence, the adjoint pairing of ``forward_gradients``."""
    div = vx.copy()
    div[:, 1:] -= vx[:, :-1]
    div += vy
    div[1:] -= vy[:-1]
    return div


def guidance_field(src, dst, mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Mixed-gradient guidance: per channel and axis, the stronger of the two gradients.

    With a mask, only grid edges touching a mask pixel take the mixed value;
    the remaining edges carry the destination gradient.
    """
    sx, sy = forward_gradients(src)
    dx, dy = forward_gradients(dst)
    vx = np.where(np.abs(sx) > np.abs(dx), sx, dx)
    vy = np.where(np.abs(sy) > np.abs(dy), sy, dy)
    if mask is not None:
        m = np.asarray(mask, bool)
        ex = np.zeros_like(m)
        ex[:, :-1] = m[:, :-1] | m[:, 1:]
        ey = np.zeros_like(m)
        ey[:-1] = m[:-1] | m[1:]
        if vx.ndim == 3:
            ex, ey = ex[..., None], ey[..., None]
        vx = np.where(ex, vx, dx)
        vy = np.where(ey, vy, dy)
    return vx, vy


def laplacian_eigenvalues(n: int) -> np.ndarray:
    k = np.arange(1, n + 1)
    return 2 * np.cos(np.pi * k / (n + 1)) - 2


def dst_poisson_solve(div, boundary) -> np.ndarray:
    """Solve the 5-point Poisson equation with Dirichlet values on the border.

    ``div`` and ``boundary`` are H x W; only the interior of ``div`` and the
    outer ring of ``boundary`` are read. The border contribution is moved to
    the right-hand side and the interior system is diagonalized with type-I
    sine transforms.
    """
    div = np.asarray(div, dtype=np.float64)
    bnd = np.asarray(boundary, dtype=np.float64)
    h, w = div.shape
    if h < 3 or w < 3:
        raise ValidationError("Poisson domain must be at least 3 x 3")
    rhs = div[1:-1, 1:-1].copy()
    rhs[0, :] -= bnd[0, 1:-1]
    rhs[-1, :] -= bnd[-1, 1:-1]
    rhs[:, 0] -= bnd[1:-1, 0]
    rhs[:, -1] -= bnd[1:-1, -1]
    coef = dstn(rhs, type=1, norm="ortho")
    denom = laplacian_eigenvalues(h - 2)[:, None] + laplacian_eigenvalues(w - 2)[None, :]
    u = bnd.copy()
    u[1:-1, 1:-1] = idstn(coef / denom, type=1, norm="ortho")
    return u


def discrete_laplacian(u) -> np.ndarray:
    """5-point Laplacian on interior pixels (border entries are zero)."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (u[:-2, 1:-1] + u[2:, 1:-1] + u[1:-1, :-2] + u[1:-1, 2:] - 4 * u[1:-1, 1:-1])
    return out


def poisson_blend(req: BlendRequest) -> np.ndarray:
    """Seamlessly paste ``src`` into ``dst`` over the request mask.

    The system is solved on the mask's bounding rectangle grown by one pixel,
    with ``dst`` as the Dirichlet border, and only mask pixels are written
    back. Everything outside the mask is left exactly as in ``dst``.
    """
    mask = np.asarray(req.mask, bool)
    dst = np.asarray(req.dst, dtype=np.float64)
    out = dst.copy()
    if not mask.any():
        return out
    if mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any():
        raise ValidationError("blend mask touches the image border")
    ys, xs = np.nonzero(mask)
    y0, y1, x0, x1 = ys.min() - 1, ys.max() + 2, xs.min() - 1, xs.max() + 2
    sub_mask = mask[y0:y1, x0:x1]
    src = np.asarray(req.src, dtype=np.float64)[y0:y1, x0:x1]
    base = dst[y0:y1, x0:x1]
    vx, vy = guidance_field(src, base, sub_mask)
    div = divergence(vx, vy)
    channels = base.shape[2] if base.ndim == 3 else 1
    for c in range(channels):
        if base.ndim == 3:
            sol = dst_poisson_solve(div[..., c], base[..., c])
            patch = out[y0:y1, x0:x1, c]
        else:
            sol = dst_poisson_solve(div, base)
            patch = out[y0:y1, x0:x1]
        patch[sub_mask] = np.clip(sol[sub_mask], 0.0, 1.0)
    return out


def alpha_blend(req: BlendRequest, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64)
    if req.dst.ndim == 3 and a.ndim == 2:
        a = a[..., None]
    return a * req.src + (1 - a) * req.dst


def blend(req: BlendRequest, alpha=None) -> np.ndarray:
    if BlendMode(req.mode) is BlendMode.POISSON:
        return poisson_blend(req)
    if alpha is None:
        raise ValidationError("alpha blending needs an alpha raster")
    return alpha_blend(req, alpha)
