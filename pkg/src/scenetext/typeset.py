"""Text rasterization, sizing to a region rectangle, and collision-free placement."""

from __future__ import annotations

import functools
import glob
import math
import os
import string
from dataclasses import dataclass, field, replace

import cv2
import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .errors import PlacementFailure, ValidationError
from .geometry import RotatedRect, apply_homography, fit_rectangle

MIN_SIZE_PX = 8
LINE_GAP = 0.2  # extra space between lines, as a fraction of the font size
FIT_MARGIN = 0.05
PLACEMENT_ATTEMPTS = 10
MAX_STRAY_FRACTION = 0.02
COLLISION_THRESHOLD = 0.05

PRINTABLE = "".join(ch for ch in string.printable if ch not in string.whitespace) + " "

DEFAULT_FONT_DIRS = ("/usr/share/fonts",)
DEFAULT_FAMILIES = ("DejaVu",)


@functools.lru_cache(maxsize=512)
def _font(path: str, size: int) -> ImageFont.FreeTypeFont:
    return ImageFont.truetype(path, size)


@functools.lru_cache(maxsize=65536)
def _glyph_metrics(path: str, size: int, ch: str):
    """(advance, ink bbox at anchor "ls") of one character."""
    font = _font(path, size)
    return font.getlength(ch), font.getbbox(ch, anchor="ls")


def _missing_glyphs(path: str) -> str:
    """Printable characters that rasterize identically to the font's notdef glyph."""
    font = _font(path, 24)
    notdef = font.getmask("")
    ref = (notdef.size, bytes(notdef))
    missing = []
    for ch in PRINTABLE.strip():
        m = font.getmask(ch)
        if (m.size, bytes(m)) == ref:
            missing.append(ch)
    return "".join(missing)


@dataclass(frozen=True)
class FontCatalog:
    fonts: tuple[tuple[str, str], ...]  # (font_id, path)

    def __post_init__(self):
        if not self.fonts:
            raise ValidationError("font catalog is empty")

    @classmethod
    def from_paths(cls, paths, check: bool = True) -> "FontCatalog":
        entries = []
        for path in sorted(paths):
            try:
                _font(path, 24)
            except OSError:
                continue
            if check and _missing_glyphs(path):
                continue
            entries.append((os.path.splitext(os.path.basename(path))[0], path))
        return cls(tuple(entries))

    @classmethod
    def from_directory(cls, directory, families=None) -> "FontCatalog":
        paths = []
        for ext in ("ttf", "otf", "TTF", "OTF"):
            paths += glob.glob(os.path.join(directory, "**", f"*.{ext}"), recursive=True)
        if families:
            paths = [p for p in paths if any(f.lower() in os.path.basename(p).lower() for f in families)]
        return cls.from_paths(paths)

    @classmethod
    def default(cls) -> "FontCatalog":
        """DejaVu faces from the system font directory, or from matplotlib's bundled copy."""
        for directory in DEFAULT_FONT_DIRS:
            if os.path.isdir(directory):
                try:
                    return cls.from_directory(directory, DEFAULT_FAMILIES)
                except ValidationError:
                    pass
        try:
            import matplotlib
        except ImportError as exc:
            raise ValidationError("no usable fonts found; pass a font directory") from exc
        return cls.from_directory(os.path.join(matplotlib.get_data_path(), "fonts", "ttf"), DEFAULT_FAMILIES)

    @property
    def ids(self) -> list[str]:
        return [fid for fid, _ in self.fonts]

    def path(self, font_id: str) -> str:
        for fid, p in self.fonts:
            if fid == font_id:
                return p
        raise KeyError(font_id)


@dataclass(frozen=True)
class Layout:
    size: tuple[int, int]  # canvas width, height
    pen: list  # (char, x, baseline_y) per inked character
    char_boxes: np.ndarray  # (N, 4) x0, y0, x1, y1
    word_boxes: np.ndarray  # (M, 4)
    words: list
    char_word: np.ndarray  # word index of each char box


def layout_text(text: str, font_path: str, size_px: int, border_px: int = 0) -> Layout:
    """Place every character using font metrics only (no rasterization)."""
    font = _font(font_path, int(size_px))
    ascent, descent = font.getmetrics()
    pad = max(1, round(0.05 * size_px)) + int(border_px)
    pitch = (1 + LINE_GAP) * size_px
    pen, boxes, char_word, words, word_boxes = [], [], [], [], []
    right = 0.0
    for row, line in enumerate(text.split("\n")):
        baseline = round(ascent + row * pitch)
        x = 0.0
        in_word = False
        for ch in line:
            px = round(x)
            advance, (l, t, r, b) = _glyph_metrics(font_path, int(size_px), ch)
            x += advance
            right = max(right, x)
            if ch.isspace():
                in_word = False
                continue
            if r <= l or b <= t:
                continue
            if not in_word:
                words.append("")
                in_word = True
            words[-1] += ch
            pen.append((ch, px, baseline))
            boxes.append([px + l, baseline + t, px + r, baseline + b])
            char_word.append(len(words) - 1)
    n_rows = text.count("\n") + 1
    boxes = np.array(boxes, dtype=np.float64).reshape(-1, 4)
    # glyphs may overhang the pen origin (negative bearings); shift so the pad holds
    dx = pad + max(0, -int(np.floor(boxes[:, 0].min()))) if len(boxes) else pad
    dy = pad + max(0, -int(np.floor(boxes[:, 1].min()))) if len(boxes) else pad
    boxes += (dx, dy, dx, dy)
    pen = [(ch, px + dx, y + dy) for ch, px, y in pen]
    char_word = np.array(char_word, dtype=np.int64)
    word_boxes = np.array([[boxes[char_word == k, 0].min(), boxes[char_word == k, 1].min(),
                            boxes[char_word == k, 2].max(), boxes[char_word == k, 3].max()]
                           for k in range(len(words))], dtype=np.float64).reshape(-1, 4)
    last_baseline = round(ascent + (n_rows - 1) * pitch) + dy
    right = max([right + dx] + [b[2] for b in boxes])
    bottom = max([last_baseline + descent] + [b[3] for b in boxes])
    width = int(math.ceil(right + pad))
    height = int(math.ceil(bottom + pad))
    return Layout((width, height), pen, boxes, word_boxes, words, char_word)


@dataclass(frozen=True)
class RenderedText:
    alpha: np.ndarray = field(repr=False)  # canvas H x W float in [0, 1]
    char_boxes: np.ndarray  # (N, 4) x0, y0, x1, y1 in canvas pixels
    word_boxes: np.ndarray
    words: list
    char_word: np.ndarray
    text: object  # the source TextSample
    style: dict


def rasterize_text(sample, font_id: str, size_px: int, catalog: FontCatalog, border_px: int = 0) -> RenderedText:
    if size_px < MIN_SIZE_PX:
        raise ValidationError(f"font size {size_px} below the {MIN_SIZE_PX}px floor")
    size_px = int(size_px)
    path = catalog.path(font_id)
    layout = layout_text(sample.content, path, size_px, border_px)
    canvas = Image.new("L", layout.size, 0)
    draw = ImageDraw.Draw(canvas)
    font = _font(path, size_px)
    for ch, x, y in layout.pen:
        draw.text((x, y), ch, font=font, fill=255, anchor="ls")
    alpha = np.asarray(canvas, dtype=np.float64) / 255.0
    style = {"font": font_id, "size_px": size_px, "has_border": border_px > 0, "border_width_px": int(border_px)}
    return RenderedText(alpha, layout.char_boxes, layout.word_boxes, layout.words, layout.char_word, sample, style)


def size_to_rect(sample, font_id: str, rect: RotatedRect, catalog: FontCatalog,
                 margin: float = FIT_MARGIN, border_px: int = 0) -> int:
    """Largest integer font size whose layout fits inside ``rect`` less ``margin``."""
    path = catalog.path(font_id)
    max_w, max_h = (1 - margin) * rect.width, (1 - margin) * rect.height

    def fits(s):
        w, h = layout_text(sample.content, path, s, border_px).size
        return w <= max_w and h <= max_h

    if not fits(MIN_SIZE_PX):
        raise PlacementFailure("text does not fit the region at the minimum size")
    lo, hi = MIN_SIZE_PX, max(MIN_SIZE_PX + 1, int(max_h) + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class Placement:
    region_label: int
    homography: np.ndarray  # text canvas -> image
    image_mask: np.ndarray = field(repr=False)  # H x W float32 alpha
    image_word_quads: np.ndarray  # (M, 4, 2)
    image_word_bboxes: np.ndarray  # (M, 4) x, y, w, h
    image_char_quads: np.ndarray  # (N, 4, 2)
    image_char_bboxes: np.ndarray  # (N, 4)

    @property
    def binary(self) -> np.ndarray:
        return self.image_mask > COLLISION_THRESHOLD


def box_corners(boxes) -> np.ndarray:
    """(N, 4) x0, y0, x1, y1 boxes to (N, 4, 2) clockwise corner lists."""
    b = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    return np.stack([b[:, [0, 1]], b[:, [2, 1]], b[:, [2, 3]], b[:, [0, 3]]], axis=1)


def quad_bboxes(quads) -> np.ndarray:
    """Tight axis-aligned x, y, w, h bound of each quad."""
    q = np.asarray(quads, dtype=np.float64).reshape(-1, 4, 2)
    lo, hi = q.min(axis=1), q.max(axis=1)
    return np.concatenate([lo, hi - lo], axis=1)


def warp_quads(H, boxes) -> np.ndarray:
    corners = box_corners(boxes)
    return apply_homography(H, corners.reshape(-1, 2)).reshape(-1, 4, 2)


def _text_to_rect_frame(rect: RotatedRect, ox: float, oy: float) -> np.ndarray:
    """Canvas pixels -> rectified frame, canvas origin at (ox, oy) in rect-aligned coords."""
    c, s = math.cos(rect.angle_rad), math.sin(rect.angle_rad)
    # rect-aligned q -> center + R (q - (w/2, h/2))
    qx, qy = ox - rect.width / 2, oy - rect.height / 2
    return np.array([
        [c, -s, rect.center[0] + c * qx - s * qy],
        [s, c, rect.center[1] + s * qx + c * qy],
        [0, 0, 1.0],
    ])


def warp_mask(alpha: np.ndarray, H: np.ndarray, shape: tuple[int, int]) -> np.ndarray | None:
    """Warp a canvas alpha into a full image-size raster; None if it leaves the image."""
    h_img, w_img = shape
    th, tw = alpha.shape
    corners = np.array([[0, 0], [tw, 0], [tw, th], [0, th]], dtype=np.float64)
    hom = np.hstack([corners, np.ones((4, 1))]) @ H.T
    if np.any(hom[:, 2] <= 1e-9):
        return None
    pts = hom[:, :2] / hom[:, 2:3]
    if pts.min() < 0 or np.any(pts[:, 0] > w_img - 1) or np.any(pts[:, 1] > h_img - 1):
        return None
    x0, y0 = np.floor(pts.min(axis=0)).astype(int)
    x1, y1 = np.ceil(pts.max(axis=0)).astype(int) + 1
    x1, y1 = min(x1, w_img), min(y1, h_img)
    shift = np.array([[1, 0, -x0], [0, 1, -y0], [0, 0, 1.0]])
    window = cv2.warpPerspective(alpha.astype(np.float32), shift @ H, (int(x1 - x0), int(y1 - y0)),
                                 flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    out = np.zeros(shape, np.float32)
    out[y0:y1, x0:x1] = np.clip(window, 0.0, 1.0)
    return out


def place_text(rendered: RenderedText, region, H_fp, existing, rng: np.random.Generator,
               rect: RotatedRect | None = None, attempts: int = PLACEMENT_ATTEMPTS,
               max_stray: float = MAX_STRAY_FRACTION) -> Placement:
    """Position rendered text inside a region's rectified rectangle.

    Each attempt draws a uniform offset that keeps the canvas inside the
    rectangle, maps the canvas into the image through ``H_fp``'s inverse and
    accepts it when at most ``max_stray`` of the inked pixels fall outside the
    region and nothing overlaps an earlier placement.
    """
    H_fp = np.asarray(H_fp, dtype=np.float64)
    if rect is None:
        rect = fit_rectangle(apply_homography(H_fp, region.contour))
        if rect is None:
            raise PlacementFailure("region has no rectangle")
    th, tw = rendered.alpha.shape
    if tw > rect.width or th > rect.height:
        raise PlacementFailure("text larger than the region rectangle")
    occupied = None
    if existing:
        occupied = np.logical_or.reduce([p.binary for p in existing])
    inv = np.linalg.inv(H_fp)
    shape = region.mask.shape
    for _ in range(attempts):
        ox = rng.uniform(0.0, rect.width - tw)
        oy = rng.uniform(0.0, rect.height - th)
        H = inv @ _text_to_rect_frame(rect, ox, oy)
        H = H / H[2, 2]
        mask = warp_mask(rendered.alpha, H, shape)
        if mask is None:
            continue
        inked = mask > 0
        n_ink = int(inked.sum())
        if n_ink == 0:
            continue
        if (inked & ~region.mask).sum() > max_stray * n_ink:
            continue
        binary = mask > COLLISION_THRESHOLD
        if occupied is not None and (binary & occupied).any():
            continue
        word_quads = warp_quads(H, rendered.word_boxes)
        char_quads = warp_quads(H, rendered.char_boxes)
        return Placement(region.label, H, mask, word_quads, quad_bboxes(word_quads),
                         char_quads, quad_bboxes(char_quads))
    raise PlacementFailure(f"no valid position after {attempts} attempts")


def with_style(rendered: RenderedText, **changes) -> RenderedText:
    return replace(rendered, style={**rendered.style, **changes})
