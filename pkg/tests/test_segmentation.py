import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import ndimage

from scenetext.errors import ValidationError
from scenetext.geometry import Plane
from scenetext.segmentation import (RegionFilterConfig, SegmentMap, extract_regions, fallback_segment,
                                    filter_regions, texture_score, third_derivative_energy, threshold_ucm)

ucm_strategy = arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 12)),
                      elements=st.sampled_from([0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0]))


def test_uniform_ucm_single_region():
    seg = threshold_ucm(np.full((20, 30), 0.05))
    assert seg.region_count == 1
    assert (seg.labels == 0).all()


def test_vertical_line_splits_in_two():
    ucm = np.zeros((20, 30))
    ucm[:, 12] = 0.5
    seg = threshold_ucm(ucm, 0.11)
    assert seg.region_count == 2
    assert len(np.unique(seg.labels[:, :12])) == 1
    assert len(np.unique(seg.labels[:, 13:])) == 1


def test_boundary_pixels_go_to_majority_then_lowest_label():
    # the line pixel has one neighbour on each side: a tie, lowest label wins
    ucm = np.zeros((5, 5))
    ucm[:, 2] = 1.0
    seg = threshold_ucm(ucm)
    assert (seg.labels[:, 2] == 0).all()


def test_diagonal_gap_is_not_connected():
    # two pixels touching only at a corner stay apart under 4-connectivity
    ucm = np.ones((2, 2))
    ucm[0, 0] = ucm[1, 1] = 0.0
    assert threshold_ucm(ucm).region_count == 2


def test_all_boundary_is_one_region():
    assert threshold_ucm(np.ones((4, 4))).region_count == 1


@pytest.mark.parametrize("tau", [-0.1, 1.5])
def test_tau_out_of_range(tau):
    with pytest.raises(ValidationError):
        threshold_ucm(np.zeros((3, 3)), tau)


@settings(max_examples=200, deadline=None)
@given(ucm_strategy, st.sampled_from([0.0, 0.05, 0.11, 0.3, 0.5, 0.9]))
def test_labels_partition_image(ucm, tau):
    seg = threshold_ucm(ucm, tau)
    assert seg.labels.shape == ucm.shape
    assert seg.labels.min() == 0 and seg.labels.max() == seg.region_count - 1
    assert len(np.unique(seg.labels)) == seg.region_count
    regions = extract_regions(seg)
    total = np.zeros(ucm.shape, int)
    for r in regions:
        total += r.mask
        assert r.area_px == r.mask.sum() > 0
        # each label is one 4-connected component
        assert ndimage.label(r.mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])[1] == 1
    assert (total == 1).all()


@st.composite
def hierarchy_ucm(draw):
    """Contour hierarchy built from full-length grid lines of random strength.

    Removing weaker lines only merges cells, so the thresholds are nested.
    Parallel lines stay two pixels apart: contours are one pixel thick.
    """
    h, w = draw(st.integers(3, 16)), draw(st.integers(3, 16))
    ucm = np.zeros((h, w))
    strengths = st.sampled_from([0.05, 0.1, 0.2, 0.4, 0.8, 1.0])
    for r in draw(st.sets(st.integers(0, (h - 3) // 2), max_size=3)):
        ucm[2 * r + 1, :] = np.maximum(ucm[2 * r + 1, :], draw(strengths))
    for c in draw(st.sets(st.integers(0, (w - 3) // 2), max_size=3)):
        ucm[:, 2 * c + 1] = np.maximum(ucm[:, 2 * c + 1], draw(strengths))
    return ucm


taus = st.sampled_from([0.0, 0.05, 0.11, 0.3, 0.5, 0.9, 1.0])


@settings(max_examples=300, deadline=None)
@given(hierarchy_ucm(), taus, taus)
def test_threshold_is_monotone(ucm, t1, t2):
    t1, t2 = min(t1, t2), max(t1, t2)
    fine = threshold_ucm(ucm, t1).labels
    coarse = threshold_ucm(ucm, t2).labels
    for k in np.unique(fine):
        assert len(np.unique(coarse[fine == k])) == 1


@settings(max_examples=200, deadline=None)
@given(ucm_strategy, taus, taus)
def test_threshold_cores_are_monotone_on_any_raster(ucm, t1, t2):
    # on rasters that are not hierarchies only sub-threshold pixels keep nesting
    t1, t2 = min(t1, t2), max(t1, t2)
    fine = threshold_ucm(ucm, t1).labels
    coarse = threshold_ucm(ucm, t2).labels
    core = ucm <= t1
    for k in np.unique(fine[core]):
        assert len(np.unique(coarse[core & (fine == k)])) == 1


def test_non_hierarchy_raster_can_split_when_tau_rises():
    ucm = np.array([[0.0, 0.4, 0.05]])
    assert threshold_ucm(ucm, 0.0).region_count == 1
    assert threshold_ucm(ucm, 0.3).region_count == 2


def test_fallback_constant_image():
    img = np.full((40, 50, 3), 0.4)
    assert fallback_segment(img).region_count == 1


def test_fallback_two_halves():
    img = np.zeros((40, 60, 3))
    img[:, 30:] = 1.0
    seg = fallback_segment(img)
    assert seg.region_count == 2
    assert seg.labels[0, 0] != seg.labels[0, -1]


def test_fallback_deterministic():
    img = np.random.default_rng(3).random((48, 48, 3))
    a = fallback_segment(img, 100)
    b = fallback_segment(img, 100)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_fallback_components_are_four_connected():
    img = np.random.default_rng(4).random((40, 40, 3))
    seg = fallback_segment(img, 50, min_size=20)
    for r in extract_regions(seg):
        assert ndimage.label(r.mask)[1] == 1


def test_extract_regions_bbox_and_contour():
    labels = np.zeros((30, 40), np.int32)
    labels[5:15, 10:30] = 1
    regions = extract_regions(SegmentMap(labels, 2))
    inner = regions[1]
    assert inner.bbox == (10, 5, 20, 10)
    assert inner.area_px == 200
    xs, ys = inner.contour[:, 0], inner.contour[:, 1]
    assert (xs.min(), xs.max(), ys.min(), ys.max()) == (10, 29, 5, 14)
    assert extract_regions(SegmentMap(labels, 2), min_area_px=201)[0].label == 0


def _third_diff_oracle(img):
    """Plain-loop third differences, valid only away from the border."""
    h, w, c = img.shape
    out = np.zeros((h, w, c))
    for y in range(1, h - 2):
        for x in range(1, w - 2):
            dx = -img[y, x - 1] + 3 * img[y, x] - 3 * img[y, x + 1] + img[y, x + 2]
            dy = -img[y - 1, x] + 3 * img[y, x] - 3 * img[y + 1, x] + img[y + 2, x]
            out[y, x] = np.sqrt(dx * dx + dy * dy)
    return out


def test_energy_matches_loop_oracle():
    img = np.random.default_rng(0).random((12, 14, 3))
    e = third_derivative_energy(img)
    np.testing.assert_allclose(e[1:-2, 1:-2], _third_diff_oracle(img)[1:-2, 1:-2], atol=1e-12)
    assert (e >= 0).all()


def test_texture_constant_and_ramp_are_zero():
    mask = np.ones((20, 20), bool)
    assert texture_score(np.full((20, 20, 3), 0.7), mask) == 0.0
    yy, xx = np.mgrid[0:20, 0:20]
    ramp = np.repeat((0.01 * xx + 0.02 * yy)[:, :, None], 3, axis=2)
    assert texture_score(ramp, mask) == pytest.approx(0.0, abs=1e-12)


def test_texture_noise_scales_linearly():
    rng = np.random.default_rng(1)
    mask = np.ones((64, 64), bool)
    a = 0.05
    s1 = texture_score(rng.uniform(-a, a, (64, 64, 3)) + 0.5, mask)
    s2 = texture_score(rng.uniform(-2 * a, 2 * a, (64, 64, 3)) + 0.5, mask)
    oracle1 = _third_diff_oracle(rng.uniform(-a, a, (64, 64, 3)))[1:-2, 1:-2].mean()
    oracle2 = _third_diff_oracle(rng.uniform(-2 * a, 2 * a, (64, 64, 3)))[1:-2, 1:-2].mean()
    assert s2 / s1 == pytest.approx(oracle2 / oracle1, rel=0.05)
    assert s2 / s1 == pytest.approx(2.0, rel=0.05)


def test_texture_empty_mask():
    with pytest.raises(ValidationError):
        texture_score(np.zeros((4, 4, 3)), np.zeros((4, 4), bool))


def _square_regions(size=200, side=120):
    labels = np.zeros((size, size), np.int32)
    o = (size - side) // 2
    labels[o:o + side, o:o + side] = 1
    return extract_regions(SegmentMap(labels, 2))


FLAT = Plane(np.array([0.0, 0.0, 1.0]), 5.0, 1.0)


def test_filter_rejects_small_region():
    regions = _square_regions(40, 3)
    img = np.full((40, 40, 3), 0.5)
    assert filter_regions(regions[1:], [FLAT], RegionFilterConfig(), img) == []


def test_filter_accepts_flat_plain_region():
    regions = _square_regions()
    img = np.full((200, 200, 3), 0.5)
    kept = filter_regions(regions[1:], [FLAT], RegionFilterConfig(), img)
    assert [r.label for r in kept] == [1]


def test_filter_rejects_edge_on_plane():
    regions = _square_regions()
    img = np.full((200, 200, 3), 0.5)
    side_on = Plane(np.array([1.0, 0.0, 0.0]), 5.0, 1.0)
    assert filter_regions(regions[1:], [side_on], RegionFilterConfig(), img) == []


def test_filter_rejects_missing_plane_textured_and_elongated():
    img = np.full((200, 200, 3), 0.5)
    regions = _square_regions()
    assert filter_regions(regions[1:], [None], RegionFilterConfig(), img) == []
    noisy = img + np.random.default_rng(0).uniform(-0.2, 0.2, img.shape)
    assert filter_regions(regions[1:], [FLAT], RegionFilterConfig(), noisy) == []
    labels = np.zeros((200, 200), np.int32)
    labels[90:100, 0:200] = 1
    strip = extract_regions(SegmentMap(labels, 2))[1]
    assert filter_regions([strip], [FLAT], RegionFilterConfig(min_area_px=100), img) == []


def test_filter_output_is_ordered_subset():
    labels = np.zeros((200, 200), np.int32)
    labels[:, 100:] = 1
    labels[80:120, 10:50] = 2
    regions = extract_regions(SegmentMap(labels, 3))
    img = np.full((200, 200, 3), 0.5)
    kept = filter_regions(regions, [FLAT] * 3, RegionFilterConfig(), img)
    assert [r.label for r in kept] == [0, 1]


def test_filter_config_rejects_nonpositive():
    with pytest.raises(ValidationError):
        RegionFilterConfig(min_area_px=0)
    with pytest.raises(ValidationError):
        RegionFilterConfig(aspect_frame="diagonal")


def test_scaled_area_threshold():
    assert RegionFilterConfig.scaled_to(256, 256).min_area_px == pytest.approx(1500.0)
