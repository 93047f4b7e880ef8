"""Shared read-only inputs for generation: corpus, fonts and colour palette."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .chroma import Palette, lab_to_rgb, learn_palette
from .corpus import Corpus, builtin_corpus, load_corpus
from .typeset import FontCatalog

# Lab (fg, bg) seeds for the builtin palette: signage-like combinations
_SEED_PAIRS = [
    ((95, 0, 0), (20, 0, 0)), ((10, 0, 0), (92, 0, 0)), ((97, -5, 80), (35, 10, -50)),
    ((50, 70, 50), (95, 0, 5)), ((95, 0, 0), (45, 65, 45)), ((20, 10, -45), (90, -3, 10)),
    ((90, -8, 70), (25, 0, 0)), ((98, 0, 0), (50, -45, 30)), ((15, 0, 0), (80, 5, 75)),
    ((60, 40, 60), (15, 5, 5)), ((85, 0, 0), (35, 25, -60)), ((25, 40, 25), (88, 5, 20)),
    ((97, 0, 0), (60, 10, 20)), ((30, -20, -20), (85, -10, -5)), ((75, 15, 70), (30, 20, 15)),
    ((40, 0, 0), (70, 0, 0)),
]


def synthetic_crops(rng: np.random.Generator, n_per_pair: int = 2, shape=(32, 96)) -> list[np.ndarray]:
    """Word-crop-like images: a bar-code of ink strokes in one colour on another, lightly noised."""
    crops = []
    h, w = shape
    for fg, bg in _SEED_PAIRS:
        fg_rgb, bg_rgb = lab_to_rgb(np.array(fg, float)), lab_to_rgb(np.array(bg, float))
        for _ in range(n_per_pair):
            ink = np.zeros(shape, bool)
            x = rng.integers(4, 10)
            while x < w - 6:
                sw = rng.integers(2, 5)
                top, bot = rng.integers(4, 10), rng.integers(h - 10, h - 4)
                ink[top:bot, x:x + sw] = True
                x += sw + rng.integers(2, 7)
            img = np.where(ink[..., None], fg_rgb, bg_rgb) + rng.normal(0, 0.01, size=(h, w, 3))
            crops.append(np.clip(np.round(img * 255), 0, 255).astype(np.uint8))
    return crops


@functools.lru_cache(maxsize=1)
def builtin_palette() -> Palette:
    rng = np.random.default_rng(20160601)
    return learn_palette(synthetic_crops(rng), rng)


@dataclass(frozen=True)
class Resources:
    corpus: Corpus
    fonts: FontCatalog
    palette: Palette

    @classmethod
    def load(cls, corpus_path=None, font_dir=None, palette_path=None, font_families=None) -> "Resources":
        corpus = load_corpus(corpus_path) if corpus_path else builtin_corpus()
        fonts = FontCatalog.from_directory(font_dir, font_families) if font_dir else FontCatalog.default()
        palette = Palette.load(palette_path) if palette_path else builtin_palette()
        return cls(corpus, fonts, palette)
