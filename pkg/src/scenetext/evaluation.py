"""PASCAL-style detection evaluation: IoU matching, precision, recall and F-measure."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import IngestionError, ValidationError

IOU_THRESHOLD = 0.5


def iou(a, b) -> float:
    """IoU of two ``(x, y, w, h)`` boxes; 0 when the union is empty."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if min(aw, ah, bw, bh) < 0:
        raise ValidationError("box sides must be non-negative")
    iw = max(min(ax + aw, bx + bw) - max(ax, bx), 0.0)
    ih = max(min(ay + ah, by + bh) - max(ay, by), 0.0)
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def iou_matrix(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64).reshape(-1, 4)
    b = np.asarray(b, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(a[:, None, 0] + a[:, None, 2], b[None, :, 0] + b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 1] + a[:, None, 3], b[None, :, 1] + b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    union = (a[:, 2] * a[:, 3])[:, None] + (b[:, 2] * b[:, 3])[None, :] - inter
    return np.divide(inter, union, out=np.zeros_like(inter), where=union > 0)


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: list = field(default_factory=list)  # (det index, gt index, iou)
    det_is_tp: np.ndarray | None = None  # per detection, in input order


def match_detections(dets, scores, gts, iou_thresh: float = IOU_THRESHOLD) -> MatchResult:
    """Greedy one-to-one matching, detections visited by descending score.

    Each detection takes the still-unmatched ground truth of highest IoU
    (lowest index on ties) if that IoU reaches ``iou_thresh``. Equal scores
    keep input order.
    """
    dets = np.asarray(dets, dtype=np.float64).reshape(-1, 4)
    gts = np.asarray(gts, dtype=np.float64).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if len(scores) != len(dets):
        raise ValidationError("one score per detection required")
    M = iou_matrix(dets, gts)
    taken = np.zeros(len(gts), bool)
    is_tp = np.zeros(len(dets), bool)
    pairs = []
    for d in np.argsort(-scores, kind="stable"):
        if not len(gts):
            break
        cand = np.where(taken, -1.0, M[d])
        g = int(np.argmax(cand))
        if cand[g] >= iou_thresh:
            taken[g] = True
            is_tp[d] = True
            pairs.append((int(d), g, float(M[d, g])))
    tp = len(pairs)
    return MatchResult(tp, len(dets) - tp, len(gts) - tp, pairs, is_tp)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class SweepResult:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    fmeasure: np.ndarray
    best_index: int
    max_recall: float

    @property
    def best(self) -> dict:
        i = self.best_index
        return {"threshold": float(self.thresholds[i]), "precision": float(self.precision[i]),
                "recall": float(self.recall[i]), "f": float(self.fmeasure[i])}

    def to_dict(self) -> dict:
        return {"max_f": self.best, "max_recall": self.max_recall, "points": len(self.thresholds)}


def pr_sweep(dets_per_image, gts_per_image, iou_thresh: float = IOU_THRESHOLD) -> SweepResult:
    """Precision/recall at every distinct detection score, pooled over images.

    ``dets_per_image`` holds ``(boxes, scores)`` per image. Greedy matching in
    score order means a detection's outcome only depends on higher-scored
    detections, so one matching pass per image serves every threshold.
    """
    all_scores, all_tp = [], []
    n_gt = 0
    for (boxes, scores), gts in zip(dets_per_image, gts_per_image):
        res = match_detections(boxes, scores, gts, iou_thresh)
        all_scores.append(np.asarray(scores, dtype=np.float64).reshape(-1))
        all_tp.append(res.det_is_tp)
        n_gt += len(np.asarray(gts).reshape(-1, 4))
    if n_gt == 0:
        raise ValidationError("no ground-truth boxes to evaluate against")
    scores = np.concatenate(all_scores) if all_scores else np.zeros(0)
    tp_flags = np.concatenate(all_tp) if all_tp else np.zeros(0, bool)
    if scores.size == 0:
        z = np.zeros(1)
        return SweepResult(np.array([np.inf]), z, z.copy(), z.copy(), 0, 0.0)
    thresholds = np.unique(scores)[::-1]
    order = np.argsort(-scores, kind="stable")
    cum_tp = np.cumsum(tp_flags[order])
    sorted_scores = scores[order]
    # detections with score >= t form a prefix of the sorted list
    counts = np.searchsorted(-sorted_scores, -thresholds, side="right")
    tp = cum_tp[counts - 1].astype(np.float64)
    precision = tp / counts
    recall = tp / n_gt
    denom = precision + recall
    fmeasure = np.divide(2 * precision * recall, denom, out=np.zeros_like(denom), where=denom > 0)
    return SweepResult(thresholds, precision, recall, fmeasure, int(np.argmax(fmeasure)), float(recall[-1]))


def load_gt_jsonl(path) -> dict:
    """Ground truth per image id from annotation JSONL (``word_bboxes`` of every instance)."""
    out = {}
    for rec in _read_jsonl(path):
        boxes = [b for inst in rec.get("instances", []) for b in inst["word_bboxes"]]
        out[rec["image"]] = np.array(boxes, dtype=np.float64).reshape(-1, 4)
    return out


def load_det_jsonl(path) -> dict:
    """Detections per image id from records ``{"image", "detections": [{"bbox", "score"}]}``."""
    out = {}
    for rec in _read_jsonl(path):
        dets = rec.get("detections", [])
        boxes = np.array([d["bbox"] for d in dets], dtype=np.float64).reshape(-1, 4)
        scores = np.array([d.get("score", 1.0) for d in dets], dtype=np.float64)
        out[rec["image"]] = (boxes, scores)
    return out


def _read_jsonl(path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read {path}: {exc}") from exc


def evaluate_files(gt_path, det_path, iou_thresh: float = IOU_THRESHOLD):
    """Sweep over every ground-truth image; images without detections count as misses."""
    gts = load_gt_jsonl(gt_path)
    dets = load_det_jsonl(det_path)
    ids = sorted(gts)
    empty = (np.zeros((0, 4)), np.zeros(0))
    sweep = pr_sweep([dets.get(i, empty) for i in ids], [gts[i] for i in ids], iou_thresh)
    report = {"images": len(ids), "gt_boxes": int(sum(len(g) for g in gts.values())),
              "detections": int(sum(len(dets.get(i, empty)[1]) for i in ids)),
              "iou_threshold": iou_thresh, **sweep.to_dict()}
    return report, sweep
