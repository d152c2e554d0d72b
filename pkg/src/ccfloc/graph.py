"""Boundary-weighted superpixel adjacency graph and all-pairs geodesics.

Adjacent regions get one undirected edge weighted by the likelihood of an
object boundary between them: the mean, over all 4-adjacent pixel pairs
straddling the two regions, of the larger of the two boundary-map values.
Geodesic distance between regions is then the weight of the cheapest path.
Weights are nonnegative, so the all-pairs computation is one Dijkstra per
source (no reweighting pass is ever needed); unreachable pairs hold +inf.
"""

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryOutOfRange, DimMismatch


@dataclass
class SuperpixelGraph:
    n_sp: int
    edges: list  # (i, j, weight) with i < j, one per adjacent region pair
    dist: np.ndarray = None

    def adjacency(self):
        adj = [[] for _ in range(self.n_sp)]
        for i, j, w in self.edges:
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


def build_graph(labeling, boundary_map):
    """Build the region adjacency graph from a boundary probability map."""
    lm = labeling.label_map
    bm = np.asarray(boundary_map, dtype=np.float64)
    if bm.shape != lm.shape:
        raise DimMismatch(f"boundary map {bm.shape} vs label map {lm.shape}")
    if bm.size and (bm.min() < 0.0 or bm.max() > 1.0):
        raise BoundaryOutOfRange("boundary values must lie in [0, 1]")

    n = labeling.n_sp
    parts_a, parts_b, parts_v = [], [], []
    for la, lb, va, vb in (
        (lm[:, :-1], lm[:, 1:], bm[:, :-1], bm[:, 1:]),
        (lm[:-1, :], lm[1:, :], bm[:-1, :], bm[1:, :]),
    ):
        diff = (la != lb).ravel()
        parts_a.append(la.ravel()[diff])
        parts_b.append(lb.ravel()[diff])
        parts_v.append(np.maximum(va, vb).ravel()[diff])
    a = np.concatenate(parts_a).astype(np.int64)
    b = np.concatenate(parts_b).astype(np.int64)
    v = np.concatenate(parts_v)

    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    key = lo * n + hi
    uniq, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=v)
    counts = np.bincount(inverse)
    weights = sums / counts
    edges = [
        (int(k // n), int(k % n), float(w)) for k, w in zip(uniq.tolist(), weights)
    ]
    return SuperpixelGraph(n_sp=n, edges=edges)


def _dijkstra(adj, n, source):
    dist = np.full(n, np.inf)
    dist[source] = 0.0
    # heap entries are (distance, node): ties resolve to the lower node id
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def all_pairs_geodesic(graph):
    """Geodesic distance matrix: one Dijkstra per source, then symmetrized
    with an elementwise min so the metric axioms hold exactly."""
    n = graph.n_sp
    adj = graph.adjacency()
    for nbrs in adj:
        for _, w in nbrs:
            if w < 0:
                raise BoundaryOutOfRange("edge weights must be >= 0")
    dist = np.empty((n, n))
    for s in range(n):
        dist[s] = _dijkstra(adj, n, s)
    dist = np.minimum(dist, dist.T)
    np.fill_diagonal(dist, 0.0)
    graph.dist = dist
    return dist
