"""SLIC-style superpixel oversegmentation and region rasterization helpers.

The segmenter clusters pixels in CIELAB + position space: distance to a
cluster center is ``sqrt(d_color^2 + (compactness * d_xy / S)^2)`` with
``S = sqrt(n_pixels / target_count)``, run for a fixed 10 iterations from a
regular grid of seeds, followed by a connectivity pass that merges orphaned
fragments into their largest neighboring region. The whole procedure is
deterministic: identical inputs give identical label maps.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import DimMismatch, ImageTooSmall

SLIC_ITERATIONS = 10

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def load_image_rgb(path):
    """Decode an image file to a float RGB array in [0, 1]."""
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    return rgb / 255.0


def rgb_to_lab(rgb):
    """sRGB in [0, 1] -> CIELAB (D65 white point)."""
    rgb = np.asarray(rgb, dtype=np.float64)
    lin = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = (lin @ _SRGB_TO_XYZ.T) / _D65_WHITE
    eps = (6.0 / 29.0) ** 3
    f = np.where(xyz > eps, np.cbrt(xyz), xyz / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


@dataclass
class SuperpixelLabeling:
    """Dense oversegmentation: contiguous region ids, every region 4-connected.

    ``centroids`` is [n_sp, 5] with columns (x, y, mean_r, mean_g, mean_b).
    """

    label_map: np.ndarray
    n_sp: int
    centroids: np.ndarray


def segment(image_rgb, target_count=300, compactness=10.0, seed=0):
    """Oversegment an RGB image into roughly ``target_count`` superpixels.

    ``seed`` is accepted for interface parity with the rest of the pipeline;
    the algorithm itself draws no randomness.
    """
    del seed
    img = np.asarray(image_rgb, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3 or img.size == 0:
        raise DimMismatch("image must be h x w x 3")
    if img.max() > 1.0 + 1e-9:
        img = img / 255.0
    if target_count < 1:
        raise ValueError("target_count must be >= 1")
    if compactness <= 0:
        raise ValueError("compactness must be > 0")

    h, w = img.shape[:2]
    n_pixels = h * w
    if n_pixels < target_count:
        raise ImageTooSmall(f"{n_pixels} pixels < target_count {target_count}")

    lab = rgb_to_lab(img)
    spacing = np.sqrt(n_pixels / target_count)

    ny = max(1, round(np.sqrt(target_count * h / w)))
    nx = max(1, round(target_count / ny))
    ny = min(ny, h)
    nx = min(nx, w)
    k = ny * nx

    cys, cxs = np.meshgrid(
        (np.arange(ny) + 0.5) * h / ny, (np.arange(nx) + 0.5) * w / nx, indexing="ij"
    )
    centers_yx = np.stack([cys.ravel(), cxs.ravel()], axis=1)
    centers_lab = lab[
        centers_yx[:, 0].astype(int), centers_yx[:, 1].astype(int)
    ].copy()

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ratio = (compactness / spacing) ** 2
    half_y = int(np.ceil(2.0 * h / ny))
    half_x = int(np.ceil(2.0 * w / nx))

    labels = np.zeros((h, w), dtype=np.int32)
    for _ in range(SLIC_ITERATIONS):
        best = np.full((h, w), np.inf)
        new_labels = labels.copy()
        for c in range(k):
            cy, cx = centers_yx[c]
            y0 = max(0, int(cy) - half_y)
            y1 = min(h, int(cy) + half_y + 1)
            x0 = max(0, int(cx) - half_x)
            x1 = min(w, int(cx) + half_x + 1)
            d_color2 = ((lab[y0:y1, x0:x1] - centers_lab[c]) ** 2).sum(axis=2)
            d_xy2 = (yy[y0:y1, x0:x1] - cy) ** 2 + (xx[y0:y1, x0:x1] - cx) ** 2
            d2 = d_color2 + ratio * d_xy2
            win = best[y0:y1, x0:x1]
            better = d2 < win
            win[better] = d2[better]
            new_labels[y0:y1, x0:x1][better] = c
        labels = new_labels

        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k).astype(np.float64)
        occupied = counts > 0
        sums_y = np.bincount(flat, weights=yy.ravel(), minlength=k)
        sums_x = np.bincount(flat, weights=xx.ravel(), minlength=k)
        centers_yx[occupied, 0] = sums_y[occupied] / counts[occupied]
        centers_yx[occupied, 1] = sums_x[occupied] / counts[occupied]
        for ch in range(3):
            sums = np.bincount(flat, weights=lab[..., ch].ravel(), minlength=k)
            centers_lab[occupied, ch] = sums[occupied] / counts[occupied]

    labels = _enforce_connectivity(labels)
    n_sp = int(labels.max()) + 1

    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n_sp).astype(np.float64)
    centroids = np.empty((n_sp, 5))
    centroids[:, 0] = np.bincount(flat, weights=xx.ravel(), minlength=n_sp) / counts
    centroids[:, 1] = np.bincount(flat, weights=yy.ravel(), minlength=n_sp) / counts
    for ch in range(3):
        centroids[:, 2 + ch] = (
            np.bincount(flat, weights=img[..., ch].ravel(), minlength=n_sp) / counts
        )
    return SuperpixelLabeling(label_map=labels, n_sp=n_sp, centroids=centroids)


def _enforce_connectivity(raw):
    """Split each raw label into 4-connected components, keep the largest
    component per label, and merge every other fragment into its largest
    neighboring region (by pixel count, ties to the lower id)."""
    h, w = raw.shape
    comp = np.full((h, w), -1, dtype=np.int32)
    sizes = []
    keeper = []
    next_id = 0
    for r in np.unique(raw):
        mask = raw == r
        ys, xs = np.nonzero(mask)
        sl = (slice(ys.min(), ys.max() + 1), slice(xs.min(), xs.max() + 1))
        sub, n_comp = ndimage.label(mask[sl], structure=_FOUR_CONN)
        best_c, best_size = 0, -1
        for c in range(1, n_comp + 1):
            sel = sub == c
            comp[sl][sel] = next_id
            size = int(sel.sum())
            sizes.append(size)
            keeper.append(False)
            if size > best_size:
                best_c, best_size = next_id, size
            next_id += 1
        keeper[best_c] = True
    sizes = np.asarray(sizes, dtype=np.int64)

    # adjacency between components
    pairs = set()
    for a, b in (
        (comp[:, :-1].ravel(), comp[:, 1:].ravel()),
        (comp[:-1, :].ravel(), comp[1:, :].ravel()),
    ):
        diff = a != b
        lo = np.minimum(a[diff], b[diff])
        hi = np.maximum(a[diff], b[diff])
        pairs.update(zip(lo.tolist(), hi.tolist()))
    neighbors = {c: set() for c in range(next_id)}
    for a, b in pairs:
        neighbors[a].add(b)
        neighbors[b].add(a)

    parent = list(range(next_id))

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    size_of = {c: int(sizes[c]) for c in range(next_id)}
    has_keeper = {c: keeper[c] for c in range(next_id)}
    roots = set(range(next_id))
    while True:
        orphans = [r for r in roots if not has_keeper[r]]
        if not orphans:
            break
        r = min(orphans, key=lambda c: (size_of[c], c))
        if not neighbors[r]:
            has_keeper[r] = True  # isolated fragment: promote to its own region
            continue
        target = max(neighbors[r], key=lambda c: (size_of[c], -c))
        parent[r] = target
        roots.discard(r)
        size_of[target] += size_of[r]
        has_keeper[target] = has_keeper[target] or has_keeper[r]
        moved = neighbors.pop(r)
        moved.discard(target)
        for n in moved:
            neighbors[n].discard(r)
            neighbors[n].add(target)
        neighbors[target].update(moved)
        neighbors[target].discard(r)
        neighbors[target].discard(target)

    root_map = np.array([find(c) for c in range(next_id)], dtype=np.int32)
    merged = root_map[comp]
    # contiguous ids ordered by first appearance in scan order
    uniq, first = np.unique(merged.ravel(), return_index=True)
    order = uniq[np.argsort(first)]
    remap = np.empty(int(merged.max()) + 1, dtype=np.int32)
    remap[order] = np.arange(order.size, dtype=np.int32)
    return remap[merged]


def region_mean(label_map, scalar_map):
    """Per-region mean of ``scalar_map``: entry r averages pixels labeled r."""
    lm = np.asarray(label_map)
    sm = np.asarray(scalar_map, dtype=np.float64)
    if lm.shape != sm.shape:
        raise DimMismatch(f"label map {lm.shape} vs scalar map {sm.shape}")
    n = int(lm.max()) + 1
    counts = np.bincount(lm.ravel(), minlength=n)
    if np.any(counts == 0):
        raise ValueError("label ids are not contiguous")
    sums = np.bincount(lm.ravel(), weights=sm.ravel(), minlength=n)
    return sums / counts


def upsample_bilinear(grid_small, out_h, out_w):
    """Bilinear resize (align-corners-false pixel model) to (out_h, out_w).

    Uses the ``v0 + t*(v1 - v0)`` form so constant grids are preserved
    exactly.
    """
    g = np.asarray(grid_small, dtype=np.float64)
    if g.ndim != 2 or g.size == 0:
        raise ValueError("grid must be a nonempty 2-D array")
    if out_h < 1 or out_w < 1:
        raise ValueError("output extents must be >= 1")
    in_h, in_w = g.shape
    ys = np.clip((np.arange(out_h) + 0.5) * (in_h / out_h) - 0.5, 0.0, in_h - 1.0)
    xs = np.clip((np.arange(out_w) + 0.5) * (in_w / out_w) - 0.5, 0.0, in_w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    ty = ys - y0
    tx = xs - x0
    g00 = g[np.ix_(y0, x0)]
    g01 = g[np.ix_(y0, x1)]
    g10 = g[np.ix_(y1, x0)]
    g11 = g[np.ix_(y1, x1)]
    top = g00 + tx[None, :] * (g01 - g00)
    bottom = g10 + tx[None, :] * (g11 - g10)
    return top + ty[:, None] * (bottom - top)
