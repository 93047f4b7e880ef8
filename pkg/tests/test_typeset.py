import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scenetext.corpus import TextKind, TextSample
from scenetext.errors import PlacementFailure, ValidationError
from scenetext.geometry import RotatedRect
from scenetext.segmentation import SegmentMap, extract_regions
from scenetext.typeset import (PRINTABLE, FontCatalog, _font, layout_text, place_text, quad_bboxes, rasterize_text,
                               size_to_rect, warp_quads)


def sample(text):
    n = text.count("\n") + 1
    kind = TextKind.WORD if n == 1 and " " not in text else TextKind.LINE if n <= 3 else TextKind.PARAGRAPH
    return TextSample(kind, text, n)


@pytest.fixture(scope="module")
def font_id(catalog):
    return "DejaVuSans" if "DejaVuSans" in catalog.ids else catalog.ids[0]


def test_catalog_non_empty(catalog):
    assert catalog.ids
    with pytest.raises(ValidationError):
        FontCatalog(())
    with pytest.raises(KeyError):
        catalog.path("no-such-font")


def test_single_char_box_is_word_box(catalog, font_id):
    r = rasterize_text(sample("A"), font_id, 32, catalog)
    assert len(r.char_boxes) == 1 and len(r.word_boxes) == 1
    np.testing.assert_array_equal(r.char_boxes[0], r.word_boxes[0])


def test_two_chars_disjoint_and_bounded(catalog, font_id):
    r = rasterize_text(sample("ab"), font_id, 40, catalog)
    a, b = r.char_boxes
    assert a[2] <= b[0]
    union = [min(a[0], b[0]), min(a[1], b[1]), max(a[2], b[2]), max(a[3], b[3])]
    np.testing.assert_array_equal(r.word_boxes[0], union)


def ink_in(alpha, box):
    x0, y0, x1, y1 = box
    return alpha[int(np.floor(y0)):int(np.ceil(y1)), int(np.floor(x0)):int(np.ceil(x1))].max()


@settings(max_examples=150, deadline=None)
@given(st.text(alphabet=PRINTABLE + "\n", min_size=1, max_size=15).filter(lambda s: s.replace("\n", "").strip()),
       st.integers(8, 60), st.integers(0, 5), st.integers(0, 3))
def test_char_boxes_hold_ink_and_stay_on_canvas(catalog, text, size, font_index, border):
    fid = catalog.ids[font_index % len(catalog.ids)]
    r = rasterize_text(sample(text), fid, size, catalog, border_px=border)
    h, w = r.alpha.shape
    assert 0.0 <= r.alpha.min() and r.alpha.max() <= 1.0
    for box in r.char_boxes:
        assert box[0] >= 0 and box[1] >= 0 and box[2] <= w and box[3] <= h
        assert ink_in(r.alpha, box) > 0
    for k, wb in enumerate(r.word_boxes):
        cb = r.char_boxes[r.char_word == k]
        np.testing.assert_array_equal(wb, [cb[:, 0].min(), cb[:, 1].min(), cb[:, 2].max(), cb[:, 3].max()])


def test_words_split_on_spaces(catalog, font_id):
    r = rasterize_text(sample("ab cd\nef"), font_id, 20, catalog)
    assert r.words == ["ab", "cd", "ef"]
    assert len(r.char_boxes) == 6


def test_three_lines_stack_with_gap(catalog, font_id):
    size = 50
    r = rasterize_text(sample("Ag\nBy\nCj"), font_id, size, catalog)
    lay = layout_text("Ag\nBy\nCj", catalog.path(font_id), size)
    baselines = sorted({y for _, _, y in lay.pen})
    assert len(baselines) == 3
    assert np.diff(baselines) == pytest.approx([1.2 * size] * 2, abs=1)
    # oracle from font metrics: top of the first line to the bottom of the last
    ascent, descent = _font(catalog.path(font_id), size).getmetrics()
    pad = max(1, round(0.05 * size))
    extent = r.alpha.shape[0] - 2 * pad
    assert extent == pytest.approx(ascent + 2 * 1.2 * size + descent, abs=1)
    slack = ascent + descent - size
    assert abs(extent - (3 * size + 2 * 0.2 * size)) <= slack + 1


def test_size_floor(catalog, font_id):
    with pytest.raises(ValidationError):
        rasterize_text(sample("x"), font_id, 7, catalog)


def test_rasterization_deterministic(catalog, font_id):
    a = rasterize_text(sample("Hello"), font_id, 30, catalog)
    b = rasterize_text(sample("Hello"), font_id, 30, catalog)
    assert a.alpha.tobytes() == b.alpha.tobytes()
    np.testing.assert_array_equal(a.char_boxes, b.char_boxes)


def test_style_fields(catalog, font_id):
    r = rasterize_text(sample("Hi"), font_id, 24, catalog, border_px=2)
    assert r.style == {"font": font_id, "size_px": 24, "has_border": True, "border_width_px": 2}


def test_size_scales_with_rect(catalog, font_id):
    s = sample("Stop here")
    w10, h10 = layout_text(s.content, catalog.path(font_id), 10).size
    rect = RotatedRect((500.0, 500.0), 10 * w10 / 0.95, 10 * h10 / 0.95, 0.0)
    size = size_to_rect(s, font_id, rect, catalog)
    assert size == pytest.approx(100, rel=0.1)
    w, h = layout_text(s.content, catalog.path(font_id), size).size
    assert w <= 0.95 * rect.width and h <= 0.95 * rect.height
    w1, h1 = layout_text(s.content, catalog.path(font_id), size + 1).size
    assert w1 > 0.95 * rect.width or h1 > 0.95 * rect.height


def test_size_fails_below_floor(catalog, font_id):
    with pytest.raises(PlacementFailure):
        size_to_rect(sample("Overflowing"), font_id, RotatedRect((5.0, 5.0), 20.0, 6.0, 0.0), catalog)


@settings(max_examples=30, deadline=None)
@given(st.floats(40, 800), st.floats(15, 300))
def test_returned_size_always_fits(catalog, w, h):
    fid = catalog.ids[0]
    s = sample("word")
    rect = RotatedRect((0.0, 0.0), max(w, h), min(w, h), 0.0)
    try:
        size = size_to_rect(s, fid, rect, catalog)
    except PlacementFailure:
        return
    lw, lh = layout_text(s.content, catalog.path(fid), size).size
    assert size >= 8
    assert lw <= 0.95 * rect.width and lh <= 0.95 * rect.height


# ------------------------------------------------------------ placement

@pytest.fixture(scope="module")
def flat_region():
    labels = np.zeros((256, 400), np.int32)
    labels[30:230, 40:360] = 1
    return extract_regions(SegmentMap(labels, 2))[1]


def test_placement_inside_empty_region(catalog, font_id, flat_region):
    r = rasterize_text(sample("Hello"), font_id, 40, catalog)
    p = place_text(r, flat_region, np.eye(3), [], np.random.default_rng(0))
    inked = p.image_mask > 0
    assert inked.any()
    assert (inked & ~flat_region.mask).sum() <= 0.02 * inked.sum()
    assert p.region_label == 1


def test_identical_offset_collides(catalog, font_id, flat_region):
    r = rasterize_text(sample("Hello"), font_id, 40, catalog)
    first = place_text(r, flat_region, np.eye(3), [], np.random.default_rng(5), attempts=1)
    with pytest.raises(PlacementFailure):
        place_text(r, flat_region, np.eye(3), [first], np.random.default_rng(5), attempts=1)


def test_placements_do_not_overlap(catalog, font_id, flat_region):
    r = rasterize_text(sample("ab"), font_id, 30, catalog)
    rng = np.random.default_rng(1)
    placed = []
    for _ in range(12):
        try:
            placed.append(place_text(r, flat_region, np.eye(3), placed, rng))
        except PlacementFailure:
            pass
    assert len(placed) >= 2
    for i in range(len(placed)):
        for j in range(i):
            assert not (placed[i].binary & placed[j].binary).any()


def test_bboxes_are_tight_bounds_of_quads(catalog, font_id, flat_region):
    r = rasterize_text(sample("two words"), font_id, 36, catalog)
    H = np.array([[1.0, 0.1, 0.0], [-0.05, 1.0, 0.0], [0.0, 0.0, 1.0]])
    p = place_text(r, flat_region, H, [], np.random.default_rng(2))
    for quad, box in zip(p.image_word_quads, p.image_word_bboxes):
        assert box[0] == quad[:, 0].min() and box[1] == quad[:, 1].min()
        assert box[0] + box[2] == pytest.approx(quad[:, 0].max(), abs=1e-9)
        assert box[1] + box[3] == pytest.approx(quad[:, 1].max(), abs=1e-9)
    np.testing.assert_allclose(p.image_word_quads, warp_quads(p.homography, r.word_boxes))
    np.testing.assert_array_equal(quad_bboxes(p.image_char_quads), p.image_char_bboxes)


def test_text_larger_than_rect_fails(catalog, font_id):
    labels = np.zeros((60, 60), np.int32)
    labels[10:40, 10:40] = 1
    region = extract_regions(SegmentMap(labels, 2))[1]
    r = rasterize_text(sample("Enormous"), font_id, 40, catalog)
    with pytest.raises(PlacementFailure):
        place_text(r, region, np.eye(3), [], np.random.default_rng(0))
