import numpy as np
import pytest
from scipy import ndimage

from ccfloc.errors import DimMismatch, ImageTooSmall
from ccfloc.superpixels import (
    region_mean,
    rgb_to_lab,
    segment,
    upsample_bilinear,
)

_FOUR = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _random_image(rng, h, w):
    img = rng.uniform(0.2, 0.8, (h, w, 3))
    # add some structure so segmentation has something to latch onto
    img[h // 3 : 2 * h // 3, w // 4 : 3 * w // 4] += 0.15
    return np.clip(img, 0.0, 1.0)


def _assert_valid_labeling(lb):
    lm = lb.label_map
    assert lm.min() == 0
    assert lm.max() == lb.n_sp - 1
    counts = np.bincount(lm.ravel(), minlength=lb.n_sp)
    assert counts.sum() == lm.size
    assert np.all(counts > 0)  # no id gaps
    for r in range(lb.n_sp):
        _, n_comp = ndimage.label(lm == r, structure=_FOUR)
        assert n_comp == 1  # every region 4-connected


def test_uniform_image_gives_near_equal_cells():
    img = np.full((60, 60, 3), 0.5)
    lb = segment(img, target_count=9, compactness=10.0, seed=0)
    assert lb.n_sp == 9
    sizes = np.bincount(lb.label_map.ravel())
    cv = sizes.std() / sizes.mean()
    assert cv < 0.2
    assert sizes.mean() == pytest.approx(400.0)


def test_target_one_single_region():
    img = np.full((40, 40, 3), 0.3)
    lb = segment(img, target_count=1, compactness=10.0, seed=0)
    assert lb.n_sp == 1
    assert np.all(lb.label_map == 0)


def test_image_too_small():
    with pytest.raises(ImageTooSmall):
        segment(np.zeros((2, 2, 3)), target_count=8, compactness=10.0, seed=0)


def test_segment_deterministic_and_valid():
    rng = np.random.default_rng(0)
    img = _random_image(rng, 48, 64)
    lb1 = segment(img, target_count=30, compactness=10.0, seed=0)
    lb2 = segment(img, target_count=30, compactness=10.0, seed=0)
    assert np.array_equal(lb1.label_map, lb2.label_map)
    _assert_valid_labeling(lb1)


def test_segment_count_near_target():
    rng = np.random.default_rng(4)
    for _ in range(4):
        img = _random_image(rng, 50, 70)
        for target in (12, 25, 60):
            lb = segment(img, target_count=target, compactness=10.0, seed=0)
            assert 0.5 * target <= lb.n_sp <= 1.5 * target
            _assert_valid_labeling(lb)


def test_segment_centroids_shape():
    img = np.full((30, 30, 3), 0.5)
    lb = segment(img, target_count=4, compactness=10.0, seed=0)
    assert lb.centroids.shape == (lb.n_sp, 5)
    assert np.all(lb.centroids[:, 0] >= 0) and np.all(lb.centroids[:, 0] < 30)
    assert np.allclose(lb.centroids[:, 2:], 0.5, atol=0.01)


# --- region_mean ---


def test_region_mean_constant():
    labels = np.array([[0, 0, 1], [0, 1, 1]])
    assert region_mean(labels, np.full((2, 3), 7.0)).tolist() == [7.0, 7.0]


def test_region_mean_hand_values():
    labels = np.array([[0, 0, 1]])
    values = np.array([[1.0, 3.0, 5.0]])
    assert region_mean(labels, values).tolist() == [2.0, 5.0]


def test_region_mean_matches_loop_oracle():
    rng = np.random.default_rng(9)
    for _ in range(20):
        h, w = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        n = int(rng.integers(1, 5))
        labels = rng.integers(0, n, (h, w))
        labels.flat[: n] = np.arange(n)  # every id used
        values = rng.normal(size=(h, w))
        got = region_mean(labels, values)
        for r in range(n):
            total, count = 0.0, 0
            for y in range(h):
                for x in range(w):
                    if labels[y, x] == r:
                        total += values[y, x]
                        count += 1
            assert got[r] == pytest.approx(total / count, abs=1e-9)


def test_region_mean_dim_mismatch():
    with pytest.raises(DimMismatch):
        region_mean(np.zeros((2, 2), dtype=int), np.zeros((3, 2)))


def test_region_mean_permutation_invariance():
    rng = np.random.default_rng(21)
    labels = rng.integers(0, 4, (6, 6))
    labels.flat[:4] = np.arange(4)
    values = rng.normal(size=(6, 6))
    base = region_mean(labels, values)
    perm = np.array([2, 0, 3, 1])
    permuted = region_mean(perm[labels], values)
    for r in range(4):
        assert permuted[perm[r]] == pytest.approx(base[r])


# --- bilinear upsampling ---


def _bilinear_reference(grid, out_h, out_w):
    """Independent scalar implementation of align-corners-false bilinear."""
    in_h, in_w = grid.shape
    out = np.empty((out_h, out_w))
    for oy in range(out_h):
        sy = min(max((oy + 0.5) * in_h / out_h - 0.5, 0.0), in_h - 1.0)
        y0 = int(np.floor(sy))
        y1 = min(y0 + 1, in_h - 1)
        ty = sy - y0
        for ox in range(out_w):
            sx = min(max((ox + 0.5) * in_w / out_w - 0.5, 0.0), in_w - 1.0)
            x0 = int(np.floor(sx))
            x1 = min(x0 + 1, in_w - 1)
            tx = sx - x0
            top = grid[y0, x0] + tx * (grid[y0, x1] - grid[y0, x0])
            bot = grid[y1, x0] + tx * (grid[y1, x1] - grid[y1, x0])
            out[oy, ox] = top + ty * (bot - top)
    return out


def test_upsample_constant_exact():
    out = upsample_bilinear(np.full((3, 4), 0.37), 9, 13)
    assert np.all(out == 0.37)


def test_upsample_monotone_row():
    out = upsample_bilinear(np.array([[0.0, 1.0]]), 1, 4)
    assert out.shape == (1, 4)
    assert np.all(np.diff(out[0]) >= 0)


def test_upsample_ramp_matches_reference():
    ramp = np.arange(9, dtype=float).reshape(3, 3)
    got = upsample_bilinear(ramp, 7, 5)
    assert np.allclose(got, _bilinear_reference(ramp, 7, 5), atol=1e-6)


def test_upsample_random_matches_reference():
    rng = np.random.default_rng(2)
    for _ in range(10):
        in_h, in_w = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        out_h, out_w = int(rng.integers(1, 15)), int(rng.integers(1, 15))
        grid = rng.normal(size=(in_h, in_w))
        got = upsample_bilinear(grid, out_h, out_w)
        assert np.allclose(got, _bilinear_reference(grid, out_h, out_w), atol=1e-9)


# --- color conversion sanity ---


def test_rgb_to_lab_reference_points():
    lab = rgb_to_lab(np.array([[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]]))
    white, black, red = lab[0]
    assert white[0] == pytest.approx(100.0, abs=0.01)
    assert abs(white[1]) < 0.01 and abs(white[2]) < 0.01
    assert np.allclose(black, 0.0, atol=1e-6)
    assert red[0] == pytest.approx(53.24, abs=0.05)
    assert red[1] == pytest.approx(80.09, abs=0.1)
    assert red[2] == pytest.approx(67.20, abs=0.1)
