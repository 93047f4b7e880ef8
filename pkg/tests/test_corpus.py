from collections import Counter

import numpy as np
import pytest

from scenetext.corpus import Corpus, TextKind, builtin_corpus, load_corpus, sample_text
from scenetext.errors import IngestionError, ValidationError


@pytest.fixture
def small(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("hello world\nfoo", encoding="utf-8")
    return load_corpus(path)


def test_load_splits_tokens_and_lines(small):
    assert small.tokens == ("hello", "world", "foo")
    assert small.lines == ("hello world", "foo")


def test_single_line_corpus(tmp_path):
    path = tmp_path / "one.txt"
    path.write_text("a b c d e", encoding="utf-8")
    c = load_corpus(path)
    assert len(c.lines) == 1
    assert len(c.tokens) == 5


def test_empty_corpus_rejected(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("", encoding="utf-8")
    with pytest.raises(ValidationError):
        load_corpus(path)


def test_whitespace_only_corpus_rejected():
    with pytest.raises(ValidationError):
        Corpus.from_text(" \n\t \n")


def test_unreadable_file(tmp_path):
    with pytest.raises(IngestionError):
        load_corpus(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"\xff\xfe\xfa")
    with pytest.raises(IngestionError):
        load_corpus(bad)


def test_tokens_have_no_whitespace():
    c = builtin_corpus()
    assert all(t and not any(ch.isspace() for ch in t) for t in c.tokens)


def test_word_sample_support(small, rng):
    for _ in range(50):
        s = sample_text(small, "word", rng)
        assert s.kind is TextKind.WORD
        assert s.line_count == 1
        assert s.content in {"hello", "world", "foo"}


@pytest.mark.parametrize("kind,limit", [("line", 3), ("paragraph", 7)])
def test_line_count_limits(kind, limit, rng):
    c = builtin_corpus()
    seen = set()
    for _ in range(500):
        s = sample_text(c, kind, rng)
        assert 1 <= s.line_count <= limit
        assert s.content.count("\n") + 1 == s.line_count
        seen.add(s.line_count)
    assert seen == set(range(1, limit + 1))


def test_lines_are_consecutive(rng):
    c = Corpus.from_text("\n".join(f"l{i}" for i in range(20)))
    for _ in range(100):
        s = sample_text(c, "paragraph", rng)
        idx = [int(x[1:]) for x in s.lines]
        assert idx == list(range(idx[0], idx[0] + len(idx)))


def test_clamped_at_corpus_end(rng):
    c = Corpus.from_text("a\nb")
    for _ in range(100):
        assert sample_text(c, "paragraph", rng).line_count <= 2


def test_long_tokens_rejected(rng):
    c = Corpus.from_text("short " + "x" * 30)
    for _ in range(100):
        assert sample_text(c, "word", rng, max_token_len=24).content == "short"


def test_determinism():
    c = builtin_corpus()
    a = [sample_text(c, k, np.random.default_rng(7)) for k in ("word", "line", "paragraph")]
    b = [sample_text(c, k, np.random.default_rng(7)) for k in ("word", "line", "paragraph")]
    assert a == b


def test_word_frequencies_uniform(small):
    rng = np.random.default_rng(0)
    counts = Counter(sample_text(small, "word", rng).content for _ in range(10_000))
    for tok in ("hello", "world", "foo"):
        assert abs(counts[tok] / 10_000 - 1 / 3) <= 0.02
