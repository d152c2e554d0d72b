"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute. Everything here runs on synthetic fixtures only.
"""

import json
import time

import numpy as np
import pytest

from ccfloc.cli import main as cli_main
from ccfloc.evaluation import corloc, iou
from ccfloc.features import (
    build_activation_matrix,
    cluster_kernels,
    select_ccfs,
)
from ccfloc.graph import SuperpixelGraph, all_pairs_geodesic
from ccfloc.propagation import LocalizeParams, build_propagation_matrix, localize_image, propagate
from ccfloc.synthetic import make_planted_dataset
from ccfloc.tensor_store import Box, DatasetManifest, ImageEntry, load_manifest, load_tensor

SUPERPIXELS = 100  # sized for the 128x128 synthetic images


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _random_metric(rng, n):
    pts = rng.uniform(0.0, 1.0, (n, 3))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    np.fill_diagonal(d, 0.0)
    return d


def _load_ccf_selection(manifest, seed=0):
    stacks = {e.id: load_tensor(e.features_path) for e in manifest.images}
    matrix = build_activation_matrix(manifest, stacks)
    return cluster_kernels(matrix, 5, seed)


def _mean_iou(manifest, ccf, params):
    scores = []
    for entry in manifest.images:
        result = localize_image(entry, ccf, params)
        gt = entry.gt_boxes[0]
        scores.append(iou(result.pred_box, gt) if result.pred_box else 0.0)
    return float(np.mean(scores))


def test_propagation_matrix_suite():
    start = time.time()
    rng = np.random.default_rng(0)
    worst_row = 0.0
    worst_identity = 0.0
    worst_fixed = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 51))
        d = _random_metric(rng, n)
        for mu in (0.5, 1.0, 2.0):
            w = build_propagation_matrix(d, mu)
            worst_row = max(worst_row, float(np.abs(w.sum(axis=1) - 1.0).max()))
        # identity limit needs distances bounded away from zero
        separated = d + 0.1 * (1.0 - np.eye(n))
        w_tiny = build_propagation_matrix(separated, 1e-6)
        worst_identity = max(worst_identity, float(np.abs(w_tiny - np.eye(n)).max()))
        c = float(rng.uniform(0.5, 5.0))
        w1 = build_propagation_matrix(d, 1.0)
        worst_fixed = max(
            worst_fixed, float(np.abs(propagate(w1, np.full(n, c)) - c).max())
        )
    elapsed = time.time() - start
    ok = worst_row < 1e-9 and worst_identity < 1e-6 and worst_fixed < 1e-9 and elapsed < 5.0
    _report(
        "propagation-matrix suite",
        ok,
        f"row-sum err {worst_row:.2e}, ||W-I|| {worst_identity:.2e}, "
        f"fixed-point err {worst_fixed:.2e}, {elapsed:.2f}s (< 5s)",
    )


def test_apsp_oracle():
    start = time.time()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 31))
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    edges.append((i, j, float(rng.uniform(0.0, 1.0))))
        g = SuperpixelGraph(n_sp=n, edges=edges)
        d = all_pairs_geodesic(g)

        fw = np.full((n, n), np.inf)
        np.fill_diagonal(fw, 0.0)
        for i, j, w in edges:
            fw[i, j] = min(fw[i, j], w)
            fw[j, i] = min(fw[j, i], w)
        for k in range(n):
            fw = np.minimum(fw, fw[:, k][:, None] + fw[k, :][None, :])

        finite = np.isfinite(fw)
        assert np.array_equal(np.isfinite(d), finite)
        if finite.any():
            worst = max(worst, float(np.abs(d[finite] - fw[finite]).max()))
        assert np.array_equal(d, d.T)
        assert np.all(np.diag(d) == 0.0)
        for k in range(n):
            rhs = d[:, k][:, None] + d[k, :][None, :]
            mask = np.isfinite(d) & np.isfinite(rhs)
            assert np.all(d[mask] <= rhs[mask] + 1e-9)
    elapsed = time.time() - start
    ok = worst < 1e-12 and elapsed < 10.0
    _report(
        "APSP oracle",
        ok,
        f"200 graphs, max |dijkstra - floyd-warshall| {worst:.2e}, "
        f"{elapsed:.2f}s (< 10s)",
    )


def test_ccf_planted_recovery():
    start = time.time()
    rng = np.random.default_rng(42)
    a = rng.uniform(0.0, 1.0, (100, 20))
    planted = rng.choice(100, size=10, replace=False)
    a[planted] = rng.uniform(5.0, 6.0, (10, 20))
    expected = set(int(i) for i in planted)
    hits = 0
    for seed in range(10):
        clustering = cluster_kernels(a, 5, seed)
        got = set(select_ccfs(clustering, rank=1).kernel_ids)
        hits += int(got == expected)
    elapsed = time.time() - start
    ok = hits == 10 and elapsed < 5.0
    _report(
        "CCF planted-cluster recovery",
        ok,
        f"{hits}/10 seeds recovered the planted set, {elapsed:.2f}s (< 5s)",
    )


def test_cluster_rank_monotonicity(tmp_path):
    means = {1: [], 3: [], 5: []}
    for i in range(20):
        root = tmp_path / f"m{i}"
        manifest = load_manifest(
            make_planted_dataset(root, n_images=2, seed=200 + i)
        )
        clustering = _load_ccf_selection(manifest)
        for rank in (1, 3, 5):
            ccf = select_ccfs(clustering, rank)
            means[rank].append(
                _mean_iou(manifest, ccf, LocalizeParams(target_count=SUPERPIXELS))
            )
    m1, m3, m5 = (float(np.mean(means[r])) for r in (1, 3, 5))
    ok = m1 > m3 > m5
    _report(
        "cluster-rank monotonicity",
        ok,
        f"mean IoU rank1 {m1:.3f} > rank3 {m3:.3f} > rank5 {m5:.3f}",
    )


def test_propagation_ablation(tmp_path):
    with_prop, without = [], []
    for i in range(8):
        root = tmp_path / f"a{i}"
        manifest = load_manifest(
            make_planted_dataset(
                root, n_images=3, seed=300 + i, activation_coverage=0.35
            )
        )
        ccf = select_ccfs(_load_ccf_selection(manifest), 1)
        with_prop.append(
            _mean_iou(manifest, ccf, LocalizeParams(target_count=SUPERPIXELS))
        )
        without.append(
            _mean_iou(
                manifest,
                ccf,
                LocalizeParams(target_count=SUPERPIXELS, propagation_enabled=False),
            )
        )
    gain = float(np.mean(with_prop)) - float(np.mean(without))
    ok = gain >= 0.05
    _report(
        "propagation ablation",
        ok,
        f"mean IoU with {np.mean(with_prop):.3f} vs without {np.mean(without):.3f} "
        f"(gain {gain:+.3f} >= 0.05)",
    )


def test_end_to_end_synthetic_localization(tmp_path):
    start = time.time()
    manifest = load_manifest(
        make_planted_dataset(tmp_path / "e2e", n_images=50, seed=7)
    )
    ccf = select_ccfs(_load_ccf_selection(manifest), 1)

    predictions = {}
    for entry in manifest.images:
        result = localize_image(entry, ccf, LocalizeParams(target_count=SUPERPIXELS))
        predictions[entry.id] = result.pred_box
    report = corloc(predictions, manifest)

    exact = True
    for entry in manifest.images:
        tiny = localize_image(
            entry, ccf, LocalizeParams(target_count=SUPERPIXELS, mu=1e-6)
        )
        off = localize_image(
            entry,
            ccf,
            LocalizeParams(target_count=SUPERPIXELS, propagation_enabled=False),
        )
        if tiny.pred_box != off.pred_box or tiny.degenerate != off.degenerate:
            exact = False
        if not np.array_equal(tiny.likelihood_map, off.likelihood_map):
            exact = False
    elapsed = time.time() - start
    ok = report.corloc == 100.0 and exact and elapsed < 60.0
    _report(
        "end-to-end synthetic localization",
        ok,
        f"CorLoc {report.corloc:.2f} on 50 images, mu->0 identical to "
        f"no-propagation: {exact}, {elapsed:.1f}s (< 60s)",
    )


def test_corloc_strictness():
    gt = Box(0, 0, 10, 10)
    entries = tuple(
        ImageEntry(id=i, image_path="", width=100, height=100,
                   features_path="", boundary_path="", gt_boxes=(gt,))
        for i in ("a", "b", "c")
    )
    manifest = DatasetManifest(class_name="strict", images=entries)
    predictions = {
        "a": Box(0, 0, 10, 6),
        "b": Box(0, 0, 10, 5),
        "c": Box(0, 0, 10, 2),
    }
    report = corloc(predictions, manifest)
    ok = abs(report.corloc - 100.0 / 3.0) < 0.005 and report.n_correct == 1
    _report(
        "CorLoc strictness",
        ok,
        f"IoUs (0.6, 0.5, 0.2) -> corloc {report.corloc:.2f} "
        "(exactly one correct; 0.5 excluded)",
    )
