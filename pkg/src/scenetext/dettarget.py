"""Dense grid targets for a fully-convolutional box regressor, and their decoding.

Each Δ x Δ cell owns one 7-vector ``(c, x̄, ȳ, w̄, h̄, cos θ, sin θ)``::

    x̄ = (x - u) / Δ,  ȳ = (y - v) / Δ,  w̄ = w / W,  h̄ = h / H

with ``(u, v)`` the cell's top-left pixel and ``(x, y)`` the box centre.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IngestionError, ValidationError

STRIDE = 16
CHANNELS = 7
SCALES = (1.0, 0.5, 0.25, 0.125)
HIGH_PRECISION_THRESHOLD = 0.3


@dataclass(frozen=True)
class GridTarget:
    cells: np.ndarray  # (H/Δ, W/Δ, 7)
    delta: int
    image_size: tuple[int, int]  # padded (H, W)
    collisions: int = 0

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.cells.shape[:2]


@dataclass(frozen=True)
class DetectionBox:
    x: float  # centre
    y: float
    w: float
    h: float
    angle: float = 0.0
    score: float = 1.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx = np.array([-0.5, 0.5, 0.5, -0.5]) * self.w
        dy = np.array([-0.5, -0.5, 0.5, 0.5]) * self.h
        return np.stack([self.x + c * dx - s * dy, self.y + s * dx + c * dy], axis=1)

    def xywh(self) -> tuple[float, float, float, float]:
        """Top-left axis-aligned form (exact for unrotated boxes)."""
        return self.x - self.w / 2, self.y - self.h / 2, self.w, self.h


def padded_size(image_size, delta: int = STRIDE) -> tuple[int, int]:
    h, w = image_size
    return -(-int(h) // delta) * delta, -(-int(w) // delta) * delta


def pad_image(image: np.ndarray, delta: int = STRIDE) -> np.ndarray:
    """Edge-replicate an image on the bottom/right up to multiples of ``delta``."""
    h, w = image.shape[:2]
    ph, pw = padded_size((h, w), delta)
    pad = [(0, ph - h), (0, pw - w)] + [(0, 0)] * (image.ndim - 2)
    return np.pad(image, pad, mode="edge")


def _annotation_boxes(ann) -> np.ndarray:
    """(N, 5) centre-form boxes x, y, w, h, θ from an annotation or record."""
    if hasattr(ann, "instances"):
        instances = ann.instances
    elif isinstance(ann, dict):
        instances = ann["instances"]
    else:
        return np.asarray(ann, dtype=np.float64).reshape(-1, 5)
    rows = [(x + bw / 2, y + bh / 2, bw, bh, 0.0)
            for inst in instances for x, y, bw, bh in inst["word_bboxes"]]
    return np.array(rows, dtype=np.float64).reshape(-1, 5)


def encode_boxes(boxes, image_size, delta: int = STRIDE) -> GridTarget:
    """Grid target from centre-form boxes ``(x, y, w, h, θ)``.

    A cell holds the box whose centre lies inside it; when several centres
    share a cell the largest box wins and the clash is counted.
    """
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 5)
    H, W = padded_size(image_size, delta)
    gh, gw = H // delta, W // delta
    cells = np.zeros((gh, gw, CHANNELS))
    owner_area = np.full((gh, gw), -1.0)
    collisions = 0
    h0, w0 = image_size
    for x, y, w, h, theta in boxes:
        if not (w > 0 and h > 0):
            raise ValidationError(f"word box has zero area: w={w}, h={h}")
        if not (0 <= x <= w0 and 0 <= y <= h0):
            raise ValidationError(f"word centre ({x}, {y}) outside the image")
        col = min(int(x // delta), gw - 1)
        row = min(int(y // delta), gh - 1)
        area = w * h
        if owner_area[row, col] >= 0:
            collisions += 1
            if area <= owner_area[row, col]:
                continue
        u, v = col * delta, row * delta
        owner_area[row, col] = area
        cells[row, col] = (1.0, (x - u) / delta, (y - v) / delta, w / W, h / H, math.cos(theta), math.sin(theta))
    return GridTarget(cells, delta, (H, W), collisions)


def encode_targets(ann, image_size, delta: int = STRIDE) -> GridTarget:
    """Grid target for an annotation's word boxes (axis-aligned, so θ = 0)."""
    return encode_boxes(_annotation_boxes(ann), image_size, delta)


def decode_grid(grid: GridTarget, threshold: float = HIGH_PRECISION_THRESHOLD) -> list[DetectionBox]:
    """One box per cell whose confidence reaches ``threshold``, in row-major cell order."""
    d = grid.delta
    H, W = grid.image_size
    out = []
    rows, cols = np.nonzero(grid.cells[..., 0] >= threshold)
    for r, c in zip(rows, cols):
        conf, xb, yb, wb, hb, ct, st = grid.cells[r, c]
        out.append(DetectionBox(c * d + d * xb, r * d + d * yb, wb * W, hb * H,
                                math.atan2(st, ct), float(np.clip(conf, 0.0, 1.0))))
    return out


# ---------------------------------------------------------------- suppression

def _rotated_iou(a: DetectionBox, b: DetectionBox) -> float:
    from shapely.geometry import Polygon

    pa, pb = Polygon(a.corners()), Polygon(b.corners())
    inter = pa.intersection(pb).area
    union = pa.area + pb.area - inter
    return inter / union if union > 0 else 0.0


def box_iou(a: DetectionBox, b: DetectionBox) -> float:
    if a.angle == 0.0 and b.angle == 0.0:
        ix = min(a.x + a.w / 2, b.x + b.w / 2) - max(a.x - a.w / 2, b.x - b.w / 2)
        iy = min(a.y + a.h / 2, b.y + b.h / 2) - max(a.y - a.h / 2, b.y - b.h / 2)
        inter = max(ix, 0.0) * max(iy, 0.0)
        union = a.area + b.area - inter
        return inter / union if union > 0 else 0.0
    return _rotated_iou(a, b)


def _iou_one_to_many(boxes: np.ndarray, i: int, rest: np.ndarray) -> np.ndarray:
    x0 = boxes[:, 0] - boxes[:, 2] / 2
    y0 = boxes[:, 1] - boxes[:, 3] / 2
    x1 = boxes[:, 0] + boxes[:, 2] / 2
    y1 = boxes[:, 1] + boxes[:, 3] / 2
    iw = np.maximum(np.minimum(x1[i], x1[rest]) - np.maximum(x0[i], x0[rest]), 0.0)
    ih = np.maximum(np.minimum(y1[i], y1[rest]) - np.maximum(y0[i], y0[rest]), 0.0)
    inter = iw * ih
    union = boxes[i, 2] * boxes[i, 3] + boxes[rest, 2] * boxes[rest, 3] - inter
    return np.divide(inter, union, out=np.zeros_like(inter), where=union > 0)


def nms_order(boxes) -> np.ndarray:
    """Visit order: score descending, then area descending, then input order."""
    score = np.array([b.score for b in boxes])
    area = np.array([b.area for b in boxes])
    return np.lexsort((np.arange(len(boxes)), -area, -score))


def nms(boxes, iou_thresh: float = 0.5) -> list[DetectionBox]:
    """Greedy suppression; a box survives unless a kept, higher-ranked box overlaps it by more than ``iou_thresh``."""
    boxes = list(boxes)
    if not boxes:
        return []
    order = nms_order(boxes)
    if any(b.angle != 0.0 for b in boxes):
        kept = []
        for i in order:
            if all(box_iou(boxes[i], boxes[k]) <= iou_thresh for k in kept):
                kept.append(i)
        return [boxes[i] for i in kept]
    arr = np.array([(b.x, b.y, b.w, b.h) for b in boxes], dtype=np.float64)
    kept = []
    while order.size:
        i = order[0]
        kept.append(i)
        rest = order[1:]
        order = rest[_iou_one_to_many(arr, i, rest) <= iou_thresh]
    return [boxes[i] for i in kept]


def multiscale_merge(per_scale: dict, iou_thresh: float = 0.5) -> list[DetectionBox]:
    """Map detections from downscaled inputs back to the original frame, then suppress."""
    merged = []
    for scale, boxes in sorted(per_scale.items(), key=lambda kv: -kv[0]):
        if not any(abs(scale - s) < 1e-12 for s in SCALES):
            raise ValidationError(f"unsupported scale {scale}; expected one of {SCALES}")
        for b in boxes:
            merged.append(DetectionBox(b.x / scale, b.y / scale, b.w / scale, b.h / scale, b.angle, b.score))
    return nms(merged, iou_thresh)


# ---------------------------------------------------------------- loss

@dataclass(frozen=True)
class LossConfig:
    nontext_weight: float = 0.01

    def __post_init__(self):
        if not 0.0 < self.nontext_weight <= 1.0:
            raise ValidationError("nontext_weight must lie in (0, 1]")


def nontext_weight_schedule(progress: float, start: float = 0.01, end: float = 1.0) -> float:
    """Geometric ramp of the no-text weight from ``start`` to ``end`` as progress goes 0 -> 1."""
    p = min(max(float(progress), 0.0), 1.0)
    return float(start * (end / start) ** p)


def grid_loss(pred: GridTarget, target: GridTarget, cfg: LossConfig = LossConfig()) -> float:
    """Squared error on all channels of text cells plus weighted squared error on c elsewhere.

    Summed with ``math.fsum`` so the value does not depend on cell order.
    """
    if pred.cells.shape != target.cells.shape or pred.delta != target.delta:
        raise ValidationError(f"grid mismatch: {pred.cells.shape}/{pred.delta} vs "
                              f"{target.cells.shape}/{target.delta}")
    sq = (np.asarray(pred.cells, np.float64) - np.asarray(target.cells, np.float64)) ** 2
    text = target.cells[..., 0] > 0
    terms = np.concatenate([sq[text].ravel(), cfg.nontext_weight * sq[~text][:, 0]])
    return math.fsum(terms.tolist())


# ---------------------------------------------------------------- export

def write_grid(path, grid: GridTarget) -> None:
    """ASCII header ``"GH GW 7 DELTA H W f32\\n"`` then row-major little-endian float32 cells."""
    gh, gw, ch = grid.cells.shape
    H, W = grid.image_size
    with open(path, "wb") as fh:
        fh.write(f"{gh} {gw} {ch} {grid.delta} {H} {W} f32\n".encode("ascii"))
        fh.write(np.ascontiguousarray(grid.cells, dtype="<f4").tobytes())


def read_grid(path) -> GridTarget:
    try:
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii").split()
            payload = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestionError(f"cannot read grid {path}: {exc}") from exc
    if len(header) != 7 or header[-1] != "f32":
        raise IngestionError(f"bad grid header in {path}")
    gh, gw, ch, delta, H, W = map(int, header[:6])
    cells = np.frombuffer(payload, dtype="<f4").reshape(gh, gw, ch).astype(np.float64)
    return GridTarget(cells, delta, (H, W))
