"""End-to-end scene generation, dataset emission and annotation records."""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import cv2
import numpy as np
from PIL import Image

from . import chroma, compose, geometry, segmentation, typeset
from .corpus import TextKind, sample_text
from .errors import IngestionError, PlacementFailure, SceneRejected, ValidationError
from .rasters import read_raster

log = logging.getLogger(__name__)

KINDS = (TextKind.WORD, TextKind.LINE, TextKind.PARAGRAPH)


@dataclass(frozen=True)
class SceneBundle:
    image: np.ndarray  # H x W x 3 uint8
    depth: np.ndarray  # H x W float, > 0
    ucm: np.ndarray | None  # H x W float in [0, 1]
    id: str

    def __post_init__(self):
        h, w = self.image.shape[:2]
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ValidationError("bundle image must be H x W x 3")
        if self.depth.shape != (h, w) or (self.ucm is not None and self.ucm.shape != (h, w)):
            raise ValidationError("bundle rasters must share H x W")
        if not np.all(np.isfinite(self.depth)) or np.any(self.depth <= 0):
            raise ValidationError("depth must be finite and positive")

    def resized(self, size) -> "SceneBundle":
        h, w = size
        if self.image.shape[:2] == (h, w):
            return self
        image = cv2.resize(self.image, (w, h), interpolation=cv2.INTER_AREA)
        depth = cv2.resize(self.depth, (w, h), interpolation=cv2.INTER_LINEAR)
        ucm = None
        if self.ucm is not None:
            # thin contours would fade under area averaging; keep their peak strength
            fy, fx = self.ucm.shape[0] / h, self.ucm.shape[1] / w
            k = max(1, int(np.ceil(max(fy, fx))))
            src = cv2.dilate(self.ucm.astype(np.float32), np.ones((k, k), np.uint8)) if k > 1 else self.ucm
            ucm = cv2.resize(np.asarray(src, np.float32), (w, h), interpolation=cv2.INTER_NEAREST).astype(np.float64)
        return SceneBundle(image, np.maximum(depth, 1e-6), ucm, self.id)


def load_bundles(directory) -> list[SceneBundle]:
    """Bundles from ``<id>.png`` images with ``<id>.depth`` and optional ``<id>.ucm`` rasters.

    Depth/UCM files may be raw float rasters or 16-bit PNGs named
    ``<id>_depth.png`` / ``<id>_ucm.png``.
    """
    try:
        names = sorted(os.listdir(directory))
    except OSError as exc:
        raise IngestionError(f"cannot list bundle directory {directory}: {exc}") from exc
    bundles = []
    for name in names:
        stem, ext = os.path.splitext(name)
        if ext.lower() not in (".png", ".jpg", ".jpeg") or stem.endswith(("_depth", "_ucm")):
            continue

        def find(kind):
            for cand in (f"{stem}.{kind}", f"{stem}_{kind}.png"):
                path = os.path.join(directory, cand)
                if os.path.exists(path):
                    return path
            return None

        depth_path = find("depth")
        if depth_path is None:
            raise IngestionError(f"bundle {stem} has no depth raster")
        with Image.open(os.path.join(directory, name)) as im:
            image = np.asarray(im.convert("RGB"))
        ucm_path = find("ucm")
        ucm = read_raster(ucm_path) if ucm_path else None
        bundles.append(SceneBundle(image, read_raster(depth_path), ucm, stem))
    return bundles


@dataclass
class GenConfig:
    seed: int = 0
    instances_per_image: int = 10
    kind_probs: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    filter: segmentation.RegionFilterConfig | None = None  # None: defaults scaled to output_size
    blend_mode: str = "poisson"
    border_prob: float = 0.2
    output_size: tuple[int, int] = (512, 512)
    attempts_budget: int | None = None  # None: 3 x instances_per_image
    ucm_threshold: float = segmentation.UCM_THRESHOLD
    fallback_scale: float = 300.0
    ransac_iters: int = 200
    max_token_len: int = 24
    # each instance is drawn at a random fraction of the largest size that fits its region
    size_fraction: tuple[float, float] = (0.35, 1.0)
    border_width_px: tuple[int, int] = (1, 3)
    shadow: bool = False
    corpus_path: str | None = None
    font_dir: str | None = None
    font_families: list[str] | None = None
    palette_path: str | None = None
    bundle_dir: str | None = None
    emit_targets: bool = False
    target_stride: int = 16

    def __post_init__(self):
        self.kind_probs = tuple(float(p) for p in self.kind_probs)
        self.output_size = tuple(int(s) for s in self.output_size)
        self.size_fraction = tuple(self.size_fraction)
        self.border_width_px = tuple(self.border_width_px)
        if len(self.kind_probs) != 3 or abs(sum(self.kind_probs) - 1.0) > 1e-9 or min(self.kind_probs) < 0:
            raise ValidationError("kind_probs must be three non-negative numbers summing to 1")
        if self.instances_per_image < 1:
            raise ValidationError("instances_per_image must be >= 1")
        if not 0.0 <= self.border_prob <= 1.0:
            raise ValidationError("border_prob must lie in [0, 1]")
        compose.BlendMode(self.blend_mode)
        if isinstance(self.filter, dict):
            self.filter = segmentation.RegionFilterConfig(**self.filter)

    @property
    def region_filter(self) -> segmentation.RegionFilterConfig:
        if self.filter is not None:
            return self.filter
        return segmentation.RegionFilterConfig.scaled_to(*self.output_size)

    @property
    def budget(self) -> int:
        return self.attempts_budget or 3 * self.instances_per_image

    @classmethod
    def from_dict(cls, data: dict) -> "GenConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "GenConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SceneAnnotation:
    image_id: str
    width: int
    height: int
    instances: list = field(default_factory=list)
    source: str = ""

    def to_record(self) -> dict:
        return {"image": self.image_id, "source": self.source, "width": self.width,
                "height": self.height, "instances": self.instances}

    @classmethod
    def from_record(cls, rec: dict) -> "SceneAnnotation":
        return cls(rec["image"], rec.get("width", 0), rec.get("height", 0), rec["instances"], rec.get("source", ""))

    def word_boxes(self) -> np.ndarray:
        boxes = [b for inst in self.instances for b in inst["word_bboxes"]]
        return np.array(boxes, dtype=np.float64).reshape(-1, 4)


def validate_annotation(record: dict, width: int | None = None, height: int | None = None) -> list[str]:
    """Problems found in one annotation record; an empty list means valid."""
    problems = []
    w = width if width is not None else record.get("width")
    h = height if height is not None else record.get("height")
    if not record.get("image"):
        problems.append("missing image id")
    for i, inst in enumerate(record.get("instances", [])):
        if not str(inst.get("text", "")).strip():
            problems.append(f"instance {i}: empty text")
        if not inst.get("word_bboxes"):
            problems.append(f"instance {i}: no word boxes")
        if len(inst.get("word_quads", [])) != len(inst.get("word_bboxes", [])):
            problems.append(f"instance {i}: quad/box count mismatch")
        for key in ("word_bboxes", "char_bboxes"):
            for box in inst.get(key, []):
                x, y, bw, bh = box
                if bw < 0 or bh < 0 or x < 0 or y < 0 or (w and x + bw > w) or (h and y + bh > h):
                    problems.append(f"instance {i}: {key} {box} outside the image")
        for quad, box in zip(inst.get("word_quads", []), inst.get("word_bboxes", [])):
            q = np.asarray(quad, dtype=np.float64).reshape(4, 2)
            tight = np.concatenate([q.min(axis=0), q.max(axis=0) - q.min(axis=0)])
            if not np.allclose(tight, box, rtol=0, atol=1e-6):
                problems.append(f"instance {i}: bbox {box} is not the bound of its quad")
    return problems


def scene_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for scene ``index``, a pure function of ``(seed, index)``."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


@dataclass
class _Candidate:
    region: segmentation.Region
    plane: geometry.Plane
    H: np.ndarray
    rect: geometry.RotatedRect
    mean_lab: np.ndarray


def _candidates(bundle: SceneBundle, cfg: GenConfig, rng) -> list[_Candidate]:
    image = bundle.image
    if bundle.ucm is not None:
        segmap = segmentation.threshold_ucm(bundle.ucm, cfg.ucm_threshold)
    else:
        segmap = segmentation.fallback_segment(image, cfg.fallback_scale)
    fcfg = cfg.region_filter
    regions = segmentation.extract_regions(segmap, fcfg.min_area_px)
    cam = geometry.CameraModel.default_for(*image.shape[:2])
    planes, rects, homs = [], [], []
    for region in regions:
        plane = geometry.fit_plane_ransac(region, bundle.depth, cam, cfg.ransac_iters, rng=rng)
        H = rect = None
        if plane is not None:
            try:
                H, rect = geometry.rectify_region(plane, region, cam)
            except ValidationError:
                plane = None
        planes.append(plane if rect is not None else None)
        rects.append(rect)
        homs.append(H)
    energy = segmentation.third_derivative_energy(image)
    kept = segmentation.filter_regions(regions, planes, fcfg, image, cam, energy, rects)
    kept_labels = {r.label for r in kept}
    rgb = image.astype(np.float64) / 255.0
    out = []
    for region, plane, H, rect in zip(regions, planes, homs, rects):
        if region.label in kept_labels:
            mean_lab = chroma.rgb_to_lab(rgb[region.mask].mean(axis=0))
            out.append(_Candidate(region, plane, H, rect, mean_lab))
    return out


def _dilate(alpha: np.ndarray, radius: int) -> np.ndarray:
    k = 2 * radius + 1
    kernel = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (k, k))
    return cv2.dilate(alpha.astype(np.float32), kernel).astype(np.float64)


@dataclass
class _Instance:
    placement: typeset.Placement
    rendered: typeset.RenderedText
    glyph_mask: np.ndarray
    border_mask: np.ndarray | None
    fg_rgb: np.ndarray
    border: chroma.BorderSpec | None


def _render_instances(bundle, cfg, resources, cands, rng) -> list[_Instance]:
    instances: list[_Instance] = []
    catalog = resources.fonts
    lo, hi = cfg.size_fraction
    for _ in range(cfg.budget):
        if len(instances) >= cfg.instances_per_image:
            break
        cand = cands[int(rng.integers(len(cands)))]
        kind = KINDS[int(rng.choice(3, p=cfg.kind_probs))]
        sample = sample_text(resources.corpus, kind, rng, cfg.max_token_len)
        font_id = catalog.ids[int(rng.integers(len(catalog.ids)))]
        pair = chroma.select_pair(cand.mean_lab, resources.palette)
        border = chroma.choose_decoration(pair.fg, pair.bg, rng, cfg.border_prob)
        border_px = int(rng.integers(cfg.border_width_px[0], cfg.border_width_px[1] + 1)) if border else 0
        try:
            max_size = typeset.size_to_rect(sample, font_id, cand.rect, catalog, border_px=border_px)
        except PlacementFailure:
            continue
        size = max(typeset.MIN_SIZE_PX, int(round(max_size * rng.uniform(lo, hi))))
        rendered = typeset.rasterize_text(sample, font_id, size, catalog, border_px)
        glyphs = rendered.alpha
        ink = glyphs
        border_canvas = None
        if border_px:
            border_canvas = _dilate(glyphs, border_px)
            ink = np.maximum(glyphs, border_canvas)
        try:
            placement = typeset.place_text(dataclasses.replace(rendered, alpha=ink), cand.region, cand.H,
                                           [i.placement for i in instances], rng, rect=cand.rect)
        except PlacementFailure:
            continue
        shape = bundle.image.shape[:2]
        glyph_mask = typeset.warp_mask(glyphs, placement.homography, shape)
        border_mask = typeset.warp_mask(border_canvas, placement.homography, shape) if border_px else None
        instances.append(_Instance(placement, rendered, glyph_mask, border_mask,
                                   chroma.lab_to_rgb(np.asarray(pair.fg)), border))
    return instances


def _window(mask: np.ndarray, margin: int):
    ys, xs = np.nonzero(mask > 0)
    h, w = mask.shape
    return (slice(max(ys.min() - margin, 0), min(ys.max() + margin + 1, h)),
            slice(max(xs.min() - margin, 0), min(xs.max() + margin + 1, w)))


def _compose(image: np.ndarray, instances, cfg: GenConfig) -> np.ndarray:
    out = image.astype(np.float64) / 255.0
    mode = compose.BlendMode(cfg.blend_mode)
    for inst in instances:
        # every operation below is local to the instance's ink plus a seam margin
        win = _window(inst.placement.image_mask, compose.MASK_DILATION_PX + 4)
        base = out[win]
        ink = inst.placement.image_mask[win]
        layer = base.copy()
        if cfg.shadow:
            shade = cv2.GaussianBlur(np.roll(ink, (2, 2), axis=(0, 1)), (5, 5), 0)
            layer *= 1 - 0.5 * shade[..., None]
        if inst.border_mask is not None:
            b = inst.border_mask[win][..., None]
            layer = b * chroma.lab_to_rgb(np.asarray(inst.border.color)) + (1 - b) * layer
        a = inst.glyph_mask[win][..., None]
        layer = a * inst.fg_rgb + (1 - a) * layer
        if mode is compose.BlendMode.POISSON:
            # the margin keeps the dilated mask off window edges inside the image;
            # where the window meets the image edge the clamp is the intended one
            mask = compose.blend_mask(ink)
            out[win] = compose.poisson_blend(compose.BlendRequest(base, layer, mask))
        else:
            req = compose.BlendRequest(base, layer, ink > typeset.COLLISION_THRESHOLD, mode)
            out[win] = compose.alpha_blend(req, ink)
    return np.clip(np.round(out * 255), 0, 255).astype(np.uint8)


def _instance_record(inst: _Instance) -> dict:
    p, r = inst.placement, inst.rendered
    border = None
    if inst.border is not None:
        border = {"color_lab": list(inst.border.color), "rule": inst.border.rule,
                  "width_px": r.style["border_width_px"]}
    return {
        "text": r.text.content,
        "kind": r.text.kind.value,
        "words": list(r.words),
        "word_bboxes": p.image_word_bboxes.tolist(),
        "word_quads": p.image_word_quads.reshape(-1, 8).tolist(),
        "char_bboxes": p.image_char_bboxes.tolist(),
        "font": r.style["font"],
        "size_px": r.style["size_px"],
        "border": border,
        "region_label": int(p.region_label),
    }


@dataclass
class ScenePlan:
    """Everything decided for one scene before pixels are blended."""
    bundle: SceneBundle  # resized to the output size
    candidates: list  # regions that passed filtering, with their planes and rectangles
    instances: list  # placed text, in placement order

    def region(self, label: int) -> segmentation.Region:
        for cand in self.candidates:
            if cand.region.label == label:
                return cand.region
        raise KeyError(label)

    @property
    def placements(self) -> list[typeset.Placement]:
        return [inst.placement for inst in self.instances]


def plan_scene(bundle: SceneBundle, cfg: GenConfig, index: int, resources) -> ScenePlan:
    """Segment, filter, fit and place text for scene ``index``; raises SceneRejected."""
    rng = scene_rng(cfg.seed, index)
    bundle = bundle.resized(cfg.output_size)
    cands = _candidates(bundle, cfg, rng)
    if not cands:
        raise SceneRejected(f"{bundle.id}: no region passed filtering")
    instances = _render_instances(bundle, cfg, resources, cands, rng)
    if not instances:
        raise SceneRejected(f"{bundle.id}: no text instance could be placed")
    return ScenePlan(bundle, cands, instances)


def generate_scene(bundle: SceneBundle, cfg: GenConfig, index: int, resources):
    """Render one annotated scene; raises SceneRejected when nothing could be placed.

    All randomness comes from ``scene_rng(cfg.seed, index)``, so the output
    depends only on the bundle, the config and the index.
    """
    plan = plan_scene(bundle, cfg, index, resources)
    return _compose(plan.bundle.image, plan.instances, cfg), annotate(plan, index)


def annotate(plan: ScenePlan, index: int) -> SceneAnnotation:
    h, w = plan.bundle.image.shape[:2]
    return SceneAnnotation(f"{index:06d}", w, h, [_instance_record(i) for i in plan.instances], plan.bundle.id)


def render_preview(image: np.ndarray, annotation: SceneAnnotation, color=(255, 0, 0), width: int = 2) -> np.ndarray:
    """Copy of ``image`` with every word box outlined, stroked inward ``width`` px."""
    out = np.array(image, copy=True)
    h, w = out.shape[:2]
    for inst in annotation.instances:
        for x, y, bw, bh in inst["word_bboxes"]:
            x0, y0 = max(int(np.floor(x)), 0), max(int(np.floor(y)), 0)
            x1, y1 = min(int(np.ceil(x + bw)), w), min(int(np.ceil(y + bh)), h)
            if x1 <= x0 or y1 <= y0:
                continue
            out[y0:min(y0 + width, y1), x0:x1] = color
            out[max(y1 - width, y0):y1, x0:x1] = color
            out[y0:y1, x0:min(x0 + width, x1)] = color
            out[y0:y1, max(x1 - width, x0):x1] = color
    return out


# ---------------------------------------------------------------- dataset runs

_WORKER = {}


def _worker_init(cfg_dict, resources):
    _WORKER["cfg"] = GenConfig.from_dict(cfg_dict)
    _WORKER["resources"] = resources


def _run_one(job):
    index, bundle = job
    cfg, resources = _WORKER["cfg"], _WORKER["resources"]
    t0 = time.perf_counter()
    try:
        image, ann = generate_scene(bundle, cfg, index, resources)
    except SceneRejected as exc:
        return index, bundle.id, None, None, str(exc), time.perf_counter() - t0
    return index, bundle.id, image, ann, None, time.perf_counter() - t0


@dataclass
class StatsReport:
    scenes_in: int = 0
    emitted: int = 0
    rejected: int = 0
    instances_histogram: dict = field(default_factory=dict)
    mean_instances: float = 0.0
    mean_generation_time_s: float = 0.0
    total_time_s: float = 0.0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _png_bytes(image: np.ndarray) -> bytes:
    ok, buf = cv2.imencode(".png", cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
    if not ok:
        raise OSError("PNG encoding failed")
    return buf.tobytes()


def run_dataset(bundles, cfg: GenConfig, out_dir, workers: int = 1, resources=None,
                preview: bool = False, emit_targets: bool | None = None) -> StatsReport:
    """Generate one scene per bundle (scene index = position) and write the dataset.

    Layout of ``out_dir``: ``images/<id>.png``, ``annotations.jsonl`` (one
    record per emitted image, in index order), ``stats.json``,
    ``manifest.json`` and optionally ``previews/`` and ``targets/``. The
    written bytes do not depend on ``workers``.
    """
    from .dettarget import encode_targets, write_grid
    from .resources import Resources

    if resources is None:
        resources = Resources.load(cfg.corpus_path, cfg.font_dir, cfg.palette_path, cfg.font_families)
    emit_targets = cfg.emit_targets if emit_targets is None else emit_targets
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    if preview:
        os.makedirs(os.path.join(out_dir, "previews"), exist_ok=True)
    if emit_targets:
        os.makedirs(os.path.join(out_dir, "targets"), exist_ok=True)

    jobs = list(enumerate(bundles))
    stats = StatsReport(scenes_in=len(jobs))
    hist = Counter()
    times = []
    written = []
    rejected = []
    t_start = time.perf_counter()
    if workers <= 1:
        _worker_init(cfg.to_dict(), resources)
        results = map(_run_one, jobs)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers, initializer=_worker_init,
                                   initargs=(cfg.to_dict(), resources))
        results = pool.map(_run_one, jobs, chunksize=1)
    ann_path = os.path.join(out_dir, "annotations.jsonl")
    try:
        with open(ann_path, "w", encoding="utf-8") as ann_fh:
            for index, source, image, ann, err, dt in results:
                times.append(dt)
                if ann is None:
                    stats.rejected += 1
                    rejected.append({"index": index, "source": source, "reason": err})
                    log.info("scene %d rejected: %s", index, err)
                    continue
                stats.emitted += 1
                hist[len(ann.instances)] += 1
                with open(os.path.join(img_dir, f"{ann.image_id}.png"), "wb") as fh:
                    fh.write(_png_bytes(image))
                if preview:
                    with open(os.path.join(out_dir, "previews", f"{ann.image_id}.png"), "wb") as fh:
                        fh.write(_png_bytes(render_preview(image, ann)))
                if emit_targets:
                    grid = encode_targets(ann, image.shape[:2], cfg.target_stride)
                    write_grid(os.path.join(out_dir, "targets", f"{ann.image_id}.grid"), grid)
                ann_fh.write(json.dumps(ann.to_record(), sort_keys=True) + "\n")
                written.append(ann.image_id)
    except OSError as exc:
        _write_manifest(out_dir, cfg, written, rejected, error=str(exc))
        raise
    finally:
        if pool is not None:
            pool.shutdown()
    stats.total_time_s = time.perf_counter() - t_start
    stats.instances_histogram = {str(k): v for k, v in sorted(hist.items())}
    stats.mean_instances = float(sum(k * v for k, v in hist.items()) / max(stats.emitted, 1))
    stats.mean_generation_time_s = float(np.mean(times)) if times else 0.0
    with open(os.path.join(out_dir, "stats.json"), "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
    _write_manifest(out_dir, cfg, written, rejected)
    return stats


def _write_manifest(out_dir, cfg, written, rejected, error=None):
    manifest = {"complete": error is None, "error": error, "images": written, "rejected": rejected,
                "config": cfg.to_dict()}
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def read_annotations(path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read annotations {path}: {exc}") from exc


def validate_dataset(out_dir) -> dict:
    """Check every record against its image; returns ``{image_id: [problems]}`` for bad ones."""
    bad = {}
    for rec in read_annotations(os.path.join(out_dir, "annotations.jsonl")):
        path = os.path.join(out_dir, "images", f"{rec['image']}.png")
        problems = []
        if not os.path.exists(path):
            problems.append("image file missing")
            problems += validate_annotation(rec)
        else:
            with Image.open(path) as im:
                w, h = im.size
            if (w, h) != (rec.get("width"), rec.get("height")):
                problems.append(f"record size {rec.get('width')}x{rec.get('height')} != image {w}x{h}")
            problems += validate_annotation(rec, w, h)
        if problems:
            bad[rec["image"]] = problems
    return bad


def dataset_stats(out_dir) -> dict:
    """Recompute counts from the written annotations and manifest."""
    recs = read_annotations(os.path.join(out_dir, "annotations.jsonl"))
    hist = Counter(len(r["instances"]) for r in recs)
    rejected = 0
    manifest_path = os.path.join(out_dir, "manifest.json")
    if os.path.exists(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as fh:
            rejected = len(json.load(fh).get("rejected", []))
    n_words = sum(len(i["word_bboxes"]) for r in recs for i in r["instances"])
    out = {
        "emitted": len(recs),
        "rejected": rejected,
        "instances_histogram": {str(k): v for k, v in sorted(hist.items())},
        "mean_instances": float(sum(k * v for k, v in hist.items()) / max(len(recs), 1)),
        "words": n_words,
    }
    timing_path = os.path.join(out_dir, "stats.json")
    if os.path.exists(timing_path):
        with open(timing_path, "r", encoding="utf-8") as fh:
            out["mean_generation_time_s"] = json.load(fh).get("mean_generation_time_s")
    return out
