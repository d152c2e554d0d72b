"""Category-consistent feature selection.

Kernels whose maximum response is high across *every* positive image of a
class are the ones that fire on the shared object. We collect each kernel's
per-image spatial maxima into an activation matrix, cluster the kernel rows
with k-means, rank the clusters by mean activation, and take the top
cluster as the selected feature set. Their feature maps, summed and
normalized, give one activation probability map per image.
"""

from dataclasses import dataclass, field

import json
import numpy as np

from .errors import (
    DimMismatch,
    KernelCountMismatch,
    LengthMismatch,
    RankOutOfRange,
    TooFewKernels,
)

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 300


def build_activation_matrix(manifest, feature_stacks):
    """Stack per-kernel spatial maxima into an m x n activation matrix.

    ``feature_stacks`` maps image id -> float array [m, h, w]. Column j
    follows manifest order; entry (i, j) is the spatial max of kernel i's
    map on image j. All stacks must agree on m.
    """
    m = None
    cols = []
    for entry in manifest.images:
        stack = np.asarray(feature_stacks[entry.id], dtype=np.float64)
        if stack.ndim != 3:
            raise DimMismatch(f"feature stack of {entry.id!r} must be 3-D")
        if m is None:
            m = stack.shape[0]
        elif stack.shape[0] != m:
            raise KernelCountMismatch(
                f"{entry.id!r} has {stack.shape[0]} kernels, expected {m}"
            )
        cols.append(stack.max(axis=(1, 2)))
    return np.stack(cols, axis=1)


def kernel_distance(a_i, a_j, p=2.0):
    """L_p distance between two kernel activation vectors."""
    a_i = np.asarray(a_i, dtype=np.float64)
    a_j = np.asarray(a_j, dtype=np.float64)
    if a_i.shape != a_j.shape:
        raise LengthMismatch(f"{a_i.shape} vs {a_j.shape}")
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.sum(np.abs(a_i - a_j) ** p) ** (1.0 / p))


@dataclass
class KernelClustering:
    """k-means partition of the kernel activation vectors.

    ``ranking`` lists cluster ids by descending ``cluster_scores`` (grand
    mean of the member kernels' activation entries); ties break toward the
    lower cluster id. An empty cluster (possible only on degenerate inputs
    with duplicated rows) scores -inf and ranks last.
    """

    k_clusters: int
    assignment: np.ndarray
    cluster_scores: np.ndarray
    ranking: np.ndarray
    inertia: float

    def members(self, cluster_id):
        return np.flatnonzero(self.assignment == cluster_id)


@dataclass(frozen=True)
class CcfSet:
    """Selected category-consistent kernels (sorted ids)."""

    kernel_ids: tuple
    source_cluster_rank: int = 1
    top_k_clusters: int = 1


def _sq_dists(X, centers):
    # ||x||^2 - 2 x.c + ||c||^2; avoids the m*k*d intermediate
    d2 = (
        (X * X).sum(axis=1)[:, None]
        - 2.0 * X @ centers.T
        + (centers * centers).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total))
            idx = min(idx, n - 1)
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(X, centers, max_iter=KMEANS_MAX_ITER):
    k = centers.shape[0]
    assign = None
    for _ in range(max_iter):
        d2 = _sq_dists(X, centers)
        new_assign = d2.argmin(axis=1)
        point_d2 = d2[np.arange(X.shape[0]), new_assign]
        # re-seed empty clusters to the current farthest point
        for c in range(k):
            if not np.any(new_assign == c):
                far = int(point_d2.argmax())
                centers[c] = X[far]
                new_assign[far] = c
                point_d2[far] = 0.0
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(k):
            members = assign == c
            centers[c] = X[members].mean(axis=0)
    inertia = float(((X - centers[assign]) ** 2).sum())
    return assign, centers, inertia


def cluster_kernels(A, k_clusters=5, seed=0):
    """Cluster the m kernel rows of the activation matrix with k-means.

    Euclidean metric, k-means++ seeding, ``KMEANS_RESTARTS`` restarts with
    the best inertia winning (ties to the earlier restart), convergence
    when assignments are stable. Deterministic for a given (A, k, seed).
    """
    X = np.asarray(A, dtype=np.float64)
    if X.ndim != 2:
        raise DimMismatch("activation matrix must be 2-D")
    if k_clusters < 1:
        raise ValueError("k_clusters must be >= 1")
    m = X.shape[0]
    if m < k_clusters:
        raise TooFewKernels(f"{m} kernels < {k_clusters} clusters")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(KMEANS_RESTARTS):
        centers = _kmeans_pp_init(X, k_clusters, rng)
        assign, centers, inertia = _lloyd(X, centers)
        if best is None or inertia < best[1]:
            best = (assign, inertia)
    assign, inertia = best

    scores = np.full(k_clusters, -np.inf)
    for c in range(k_clusters):
        members = assign == c
        if np.any(members):
            scores[c] = X[members].mean()
    ranking = np.array(
        sorted(range(k_clusters), key=lambda c: (-scores[c], c)), dtype=np.int64
    )
    return KernelClustering(
        k_clusters=k_clusters,
        assignment=assign.astype(np.int64),
        cluster_scores=scores,
        ranking=ranking,
        inertia=inertia,
    )


def select_ccfs(clustering, rank=1):
    """Return the kernels of the rank-th cluster (rank 1 = the selected set)."""
    if not 1 <= rank <= clustering.k_clusters:
        raise RankOutOfRange(f"rank {rank} not in [1, {clustering.k_clusters}]")
    cluster = int(clustering.ranking[rank - 1])
    ids = clustering.members(cluster)
    if ids.size == 0:
        raise RankOutOfRange(f"cluster at rank {rank} is empty")
    return CcfSet(kernel_ids=tuple(int(i) for i in ids), source_cluster_rank=rank)


def select_ccfs_top_k(clustering, top_k):
    """Union of the clusters at ranks 1..top_k (ablation over cluster count)."""
    if not 1 <= top_k <= clustering.k_clusters:
        raise RankOutOfRange(f"top_k {top_k} not in [1, {clustering.k_clusters}]")
    ids = np.concatenate(
        [clustering.members(int(clustering.ranking[r])) for r in range(top_k)]
    )
    ids = np.unique(ids)
    if ids.size == 0:
        raise RankOutOfRange("selected clusters are all empty")
    return CcfSet(
        kernel_ids=tuple(int(i) for i in ids),
        source_cluster_rank=1,
        top_k_clusters=top_k,
    )


@dataclass
class ActivationMap:
    """Per-image combined activation map, normalized to a probability grid.

    ``total`` witnesses the normalization (the grid sum, 1 up to rounding).
    An all-zero combination sets ``degenerate`` and yields a uniform grid so
    downstream stages stay total.
    """

    image_id: str
    grid: np.ndarray
    total: float
    degenerate: bool = False


def combined_activation_map(feature_stack, ccf_set, image_id=""):
    """Sum the selected kernels' maps (negatives clamped to 0 first) and
    normalize the result to sum to 1."""
    stack = np.asarray(feature_stack, dtype=np.float64)
    if stack.ndim != 3:
        raise DimMismatch("feature stack must be [kernels, h, w]")
    ids = np.asarray(ccf_set.kernel_ids, dtype=np.int64)
    if ids.size == 0 or ids.min() < 0 or ids.max() >= stack.shape[0]:
        raise ValueError("kernel ids outside the stack")
    grid = np.clip(stack[ids], 0.0, None).sum(axis=0)
    total = float(grid.sum())
    if total == 0.0:
        grid = np.full_like(grid, 1.0 / grid.size)
        return ActivationMap(image_id, grid, float(grid.sum()), degenerate=True)
    grid = grid / total
    return ActivationMap(image_id, grid, float(grid.sum()), degenerate=False)


def save_ccf_set(path, ccf_set, clustering, class_name, seed):
    """Serialize a selection result (with cluster diagnostics) as JSON."""
    doc = {
        "class_name": class_name,
        "kernel_ids": list(ccf_set.kernel_ids),
        "k_clusters": clustering.k_clusters,
        "rank": ccf_set.source_cluster_rank,
        "top_k": ccf_set.top_k_clusters,
        "seed": seed,
        "cluster_scores": [float(s) for s in clustering.cluster_scores],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_ccf_set(path):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return CcfSet(
        kernel_ids=tuple(int(i) for i in doc["kernel_ids"]),
        source_cluster_rank=int(doc.get("rank", 1)),
        top_k_clusters=int(doc.get("top_k", 1)),
    )
