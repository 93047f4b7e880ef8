"""Plain-text corpus loading and word/line/paragraph sampling."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import IngestionError, ValidationError

MAX_LINES = {"word": 1, "line": 3, "paragraph": 7}


class TextKind(str, enum.Enum):
    WORD = "word"
    LINE = "line"
    PARAGRAPH = "paragraph"


@dataclass(frozen=True)
class Corpus:
    lines: tuple[str, ...]
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, text: str) -> "Corpus":
        lines = tuple(ln.strip() for ln in text.split("\n") if ln.strip())
        tokens = tuple(text.split())
        if not tokens:
            raise ValidationError("corpus is empty")
        return cls(lines=lines, tokens=tokens)


@dataclass(frozen=True)
class TextSample:
    kind: TextKind
    content: str
    line_count: int

    @property
    def lines(self) -> list[str]:
        return self.content.split("\n")


def load_corpus(path) -> Corpus:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestionError(f"cannot read corpus {path}: {exc}") from exc
    return Corpus.from_text(text)


def builtin_corpus() -> Corpus:
    """Small English corpus shipped with the package for desk runs."""
    text = resources.files("scenetext").joinpath("data/corpus.txt").read_text("utf-8")
    return Corpus.from_text(text)


def sample_text(corpus: Corpus, kind, rng: np.random.Generator, max_token_len: int = 24,
                max_tries: int = 100) -> TextSample:
    """Draw one text block of the requested kind.

    Words are uniform over tokens. Lines and paragraphs take ``k`` consecutive
    corpus lines starting at a uniform line, with ``k`` uniform in
    ``1..MAX_LINES[kind]`` and clamped to the lines remaining. Any draw holding
    a token longer than ``max_token_len`` is rejected and redrawn.
    """
    kind = TextKind(kind)
    if not corpus.tokens:
        raise ValidationError("corpus is empty")
    for _ in range(max_tries):
        if kind is TextKind.WORD:
            tok = corpus.tokens[rng.integers(len(corpus.tokens))]
            if len(tok) <= max_token_len:
                return TextSample(kind, tok, 1)
            continue
        k = int(rng.integers(1, MAX_LINES[kind.value] + 1))
        start = int(rng.integers(len(corpus.lines)))
        block = corpus.lines[start:start + k]
        # collapse internal whitespace runs so rows hold single-space-separated tokens
        rows = [" ".join(ln.split()) for ln in block]
        if all(len(t) <= max_token_len for row in rows for t in row.split()):
            return TextSample(kind, "\n".join(rows), len(rows))
    raise ValidationError(f"no {kind.value} sample within token length {max_token_len}")
