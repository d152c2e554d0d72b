"""Synthetic planted-object datasets for tests and demos.

Each generated image carries one rectangular object of a distinct color on
a noisy background. The boundary map gets a strong ring along the object
border, mild clutter ridges in the background (so background geodesics are
not free), and a small positive floor everywhere so every region-to-region
edge has nonzero weight. Feature stacks contain five kernel groups with
descending activation levels aimed at different targets:

    group 0  object interior (or the fraction ``activation_coverage`` of it)
    group 1  object dilated by one feature cell
    group 2  object shifted sideways by half its width
    group 3  a random box
    group 4  the image corner farthest from the object

Clustering the resulting activation matrix therefore ranks group g at rank
g + 1, which is what the cluster-rank and propagation ablation suites lean
on.
"""

import json
import os

import numpy as np
from PIL import Image

from .tensor_store import save_tensor

GROUP_LEVELS = (8.0, 5.0, 3.0, 1.8, 0.8)

_BG_COLOR = np.array([0.76, 0.78, 0.80])
_OBJ_COLOR = np.array([0.55, 0.16, 0.14])
_FRAME_COLOR = np.array([0.10, 0.11, 0.13])


def _feature_box(x0, y0, x1, y1, w, h, fw, fh):
    fx0 = int(np.floor(x0 * fw / w))
    fy0 = int(np.floor(y0 * fh / h))
    fx1 = min(fw, max(fx0 + 1, int(np.ceil(x1 * fw / w))))
    fy1 = min(fh, max(fy0 + 1, int(np.ceil(y1 * fh / h))))
    return fx0, fy0, fx1, fy1


def _feature_box_inner(x0, y0, x1, y1, w, h, fw, fh):
    # rounds inward: the blob must not spill outside the object once the
    # coarse grid is upsampled back to pixels
    fx0 = int(np.ceil(x0 * fw / w))
    fy0 = int(np.ceil(y0 * fh / h))
    fx1 = max(fx0 + 1, int(np.floor(x1 * fw / w)))
    fy1 = max(fy0 + 1, int(np.floor(y1 * fh / h)))
    return fx0, fy0, min(fw, fx1), min(fh, fy1)


def _group_regions(fbox, inner_fbox, fw, fh, coverage, rng):
    fx0, fy0, fx1, fy1 = fbox
    bw = fx1 - fx0
    bh = fy1 - fy0

    ix0, iy0, ix1, iy1 = inner_fbox
    cw = max(1, round((ix1 - ix0) * coverage))
    inside = (ix0, iy0, ix0 + cw, iy1)

    dilated = (max(0, fx0 - 1), max(0, fy0 - 1), min(fw, fx1 + 1), min(fh, fy1 + 1))

    half = max(1, bw // 2)
    if fx1 + half <= fw:
        shifted = (fx0 + half, fy0, fx1 + half, fy1)
    else:
        shifted = (max(0, fx0 - half), fy0, max(1, fx1 - half), fy1)

    rw = max(2, bw // 2)
    rh = max(2, bh // 2)
    rx0 = int(rng.integers(0, max(1, fw - rw + 1)))
    ry0 = int(rng.integers(0, max(1, fh - rh + 1)))
    random_box = (rx0, ry0, min(fw, rx0 + rw), min(fh, ry0 + rh))

    side = min(3, fw, fh)
    corners = [(0, 0), (fw - side, 0), (0, fh - side), (fw - side, fh - side)]
    ocx = (fx0 + fx1) / 2.0
    ocy = (fy0 + fy1) / 2.0
    far_x, far_y = max(
        corners, key=lambda c: (c[0] + side / 2 - ocx) ** 2 + (c[1] + side / 2 - ocy) ** 2
    )
    corner = (far_x, far_y, far_x + side, far_y + side)

    return [inside, dilated, shifted, random_box, corner]


def _mosaic_cuts(extent, n_cuts, rng):
    if n_cuts < 1 or extent < 4 * (n_cuts + 1):
        return []
    base = np.linspace(0, extent, n_cuts + 2)[1:-1]
    jitter = rng.uniform(-extent * 0.06, extent * 0.06, n_cuts)
    cuts = np.clip(np.rint(base + jitter), 4, extent - 4).astype(int)
    return sorted(set(cuts.tolist()))


def _draw_mosaic(img, bnd, rng, n_cuts, jitter):
    """Tile the background into mildly varying color patches with moderate
    boundary ridges along the seams, so background geodesics cost something."""
    h, w = bnd.shape
    x_cuts = _mosaic_cuts(w, n_cuts, rng)
    y_cuts = _mosaic_cuts(h, n_cuts, rng)
    ys = [0] + y_cuts + [h]
    xs = [0] + x_cuts + [w]
    for i in range(len(ys) - 1):
        for j in range(len(xs) - 1):
            shade = rng.uniform(-jitter, jitter, 3)
            img[ys[i] : ys[i + 1], xs[j] : xs[j + 1]] += shade
    for x in x_cuts:
        ridge = float(rng.uniform(0.55, 0.9))
        np.maximum(bnd[:, x - 1 : x + 2], ridge, out=bnd[:, x - 1 : x + 2])
    for y in y_cuts:
        ridge = float(rng.uniform(0.55, 0.9))
        np.maximum(bnd[y - 1 : y + 2, :], ridge, out=bnd[y - 1 : y + 2, :])


def make_planted_dataset(
    root,
    n_images=10,
    seed=0,
    image_size=(128, 128),
    feature_size=(16, 16),
    kernels_per_group=4,
    group_levels=GROUP_LEVELS,
    activation_coverage=1.0,
    activation_noise=0.01,
    boundary_floor=0.04,
    ring_value=1.0,
    frame_width=4,
    mosaic_cuts=3,
    mosaic_jitter=0.08,
    moat_width=8,
    class_name="synthetic",
):
    """Write a planted dataset under ``root`` and return the manifest path.

    ``activation_coverage`` < 1 makes the top kernel group light up only
    that fraction of the object (the setup the propagation ablation needs);
    the boundary band always outlines the full object. The object sits in a
    ``frame_width``-pixel frame of its own color so segmentation produces
    frame superpixels and background-to-object geodesics must cross two
    strong-boundary edges, not one. The background mosaic keeps stray
    activation mass local instead of letting it smear across the image,
    while the ridge-free moat just outside the frame keeps the background
    around the object well connected (isolated slivers next to the object
    would otherwise dominate the row-normalized propagation).
    """
    h, w = image_size
    fh, fw = feature_size
    rng = np.random.default_rng(seed)
    margin = frame_width + moat_width + 6

    for sub in ("images", "features", "boundaries"):
        os.makedirs(os.path.join(root, sub), exist_ok=True)

    records = []
    for idx in range(n_images):
        image_id = f"img{idx:03d}"
        bw = int(rng.integers(w // 4, w // 2 + 1))
        bh = int(rng.integers(h // 4, h // 2 + 1))
        x0 = int(rng.integers(margin, w - margin - bw + 1))
        y0 = int(rng.integers(margin, h - margin - bh + 1))
        x1, y1 = x0 + bw, y0 + bh

        img = np.empty((h, w, 3))
        img[:] = _BG_COLOR
        bnd = boundary_floor + rng.uniform(0.0, 0.01, (h, w))
        if mosaic_cuts:
            _draw_mosaic(img, bnd, rng, mosaic_cuts, mosaic_jitter)
        img[y0 - frame_width : y1 + frame_width, x0 - frame_width : x1 + frame_width] = (
            _FRAME_COLOR
        )
        img[y0:y1, x0:x1] = _OBJ_COLOR
        img += rng.normal(0.0, 0.012, (h, w, 3))
        img = np.clip(img, 0.0, 1.0)
        image_path = os.path.join("images", image_id + ".png")
        Image.fromarray(np.rint(img * 255.0).astype(np.uint8)).save(
            os.path.join(root, image_path)
        )

        # ridge-free moat around the frame, strong-boundary band over the
        # frame (one pixel into each side), ridge-free object interior
        fb = frame_width + 1
        mb = fb + moat_width
        bnd[y0 - mb : y1 + mb, x0 - mb : x1 + mb] = boundary_floor
        bnd[y0 - fb : y1 + fb, x0 - fb : x1 + fb] = ring_value
        bnd[y0 + 1 : y1 - 1, x0 + 1 : x1 - 1] = boundary_floor + rng.uniform(
            0.0, 0.01, (max(0, bh - 2), max(0, bw - 2))
        )
        bnd = np.clip(bnd, 0.0, 1.0)
        boundary_path = os.path.join("boundaries", image_id + ".ccft")
        save_tensor(os.path.join(root, boundary_path), bnd.astype(np.float32))

        fbox = _feature_box(x0, y0, x1, y1, w, h, fw, fh)
        inner_fbox = _feature_box_inner(x0, y0, x1, y1, w, h, fw, fh)
        regions = _group_regions(fbox, inner_fbox, fw, fh, activation_coverage, rng)
        m = kernels_per_group * len(group_levels)
        stack = np.empty((m, fh, fw), dtype=np.float64)
        for g, level in enumerate(group_levels):
            rx0, ry0, rx1, ry1 = regions[g]
            for k in range(kernels_per_group):
                grid = rng.uniform(0.0, activation_noise * level, (fh, fw))
                gain = float(rng.uniform(0.95, 1.05))
                grid[ry0:ry1, rx0:rx1] = (
                    level * gain * (0.9 + 0.2 * rng.random((ry1 - ry0, rx1 - rx0)))
                )
                stack[g * kernels_per_group + k] = grid
        features_path = os.path.join("features", image_id + ".ccft")
        save_tensor(os.path.join(root, features_path), stack.astype(np.float32))

        records.append(
            {
                "id": image_id,
                "image_path": image_path,
                "width": w,
                "height": h,
                "features_path": features_path,
                "boundary_path": boundary_path,
                "gt_boxes": [[x0, y0, x1, y1]],
            }
        )

    manifest_path = os.path.join(root, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh_out:
        json.dump({"class_name": class_name, "images": records}, fh_out, indent=2)
        fh_out.write("\n")
    return manifest_path
