"""Synthetic scene-text generation with dense grid detection targets."""

from .corpus import Corpus, TextKind, TextSample, load_corpus, sample_text
from .errors import IngestionError, PlacementFailure, SceneRejected, SceneTextError, ValidationError
from .scene import GenConfig, SceneAnnotation, SceneBundle, generate_scene, plan_scene, render_preview, run_dataset

__all__ = [
    "Corpus", "TextKind", "TextSample", "load_corpus", "sample_text",
    "IngestionError", "PlacementFailure", "SceneRejected", "SceneTextError", "ValidationError",
    "GenConfig", "SceneAnnotation", "SceneBundle", "generate_scene", "plan_scene", "render_preview", "run_dataset",
]

__version__ = "0.1.0"
