"""Directed approximate k-NN graph construction over observation rows.

The index is a kd-tree (median split on the dimension of maximal spread,
configurable leaf bucket).  Queries use branch-and-bound search under the
Euclidean metric; with ``eps > 0`` subtrees are pruned whenever their box
distance exceeds (current k-th best)/(1 + eps), so every returned distance
is at most (1 + eps) times the true same-rank neighbor distance.  ``eps = 0``
is exact.  Large eps degenerates to a cheap descend-and-scan search, which
is the practical regime for high-dimensional data where exact kd-tree
search cannot prune.

Ties in neighbor rank are broken toward the smaller row index.  A node is
never its own neighbor, but duplicate rows are legitimate neighbors of each
other.  The resulting digraph has exactly k out-edges per node and is a
pure function of (data, k, eps): rebuilds are bit-identical.

For d above ``brute_force_dim_threshold`` (default 4096) construction falls
back to blocked brute-force exact k-NN with the same output contract.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import NotEnoughNeighbors, ParseError, ValidationError

DEFAULT_BUCKET_SIZE = 16
DEFAULT_BRUTE_FORCE_DIM = 4096


def _as_array(data) -> np.ndarray:
    values = getattr(data, "values", data)
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


@dataclass(frozen=True)
class KdTree:
    """Axis-aligned binary space partition over the data rows."""

    points: np.ndarray
    bucket_size: int
    impl: cKDTree = field(repr=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def max_depth(self) -> int:
        def walk(node):
            if node.lesser is None:
                return 0
            return 1 + max(walk(node.lesser), walk(node.greater))

        return walk(self.impl.tree)


def build_kdtree(data, bucket_size: int = DEFAULT_BUCKET_SIZE) -> KdTree:
    """Index all rows of `data`; O(dn log n) construction."""
    points = _as_array(data)
    if points.shape[0] < 1:
        raise ValidationError("cannot index an empty matrix")
    if bucket_size < 1:
        raise ValueError("bucket_size must be >= 1")
    impl = cKDTree(points, leafsize=bucket_size, balanced_tree=True, copy_data=False)
    return KdTree(points=points, bucket_size=bucket_size, impl=impl)


def _rank_candidates(dists, idx, self_index, k):
    """Order candidates by (distance, index), drop self, keep k."""
    keep = idx != self_index
    d, i = dists[keep], idx[keep]
    order = np.lexsort((i, d))
    return i[order[:k]], d[order[:k]]


def knn_query(tree: KdTree, query_index: int, k: int, eps: float = 0.0) -> np.ndarray:
    """k nearest rows to row `query_index`, self excluded, ties to smaller index."""
    n = tree.n
    if k >= n:
        raise NotEnoughNeighbors(f"k={k} but only {n - 1} other rows exist")
    if k < 1:
        raise ValueError("k must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    x = tree.points[query_index]
    if eps > 0:
        dists, idx = tree.impl.query(x, k=min(k + 1, n), eps=eps)
        ids, _ = _rank_candidates(np.atleast_1d(dists), np.atleast_1d(idx), query_index, k)
        return ids
    m = min(k + 2, n)
    while True:
        dists, idx = tree.impl.query(x, k=m)
        dists, idx = np.atleast_1d(dists), np.atleast_1d(idx)
        keep = idx != query_index
        cand_d = dists[keep]
        # candidate pool is complete once the k-th candidate distance is
        # strictly inside the returned ball (all ties then present)
        if m == n or (cand_d.size >= k and cand_d[k - 1] < dists[-1]):
            ids, _ = _rank_candidates(dists, idx, query_index, k)
            return ids
        m = min(2 * m, n)


@dataclass(frozen=True)
class DirectedKnnGraph:
    """Directed k-NN digraph: edge i -> j when j is among i's k nearest."""

    neighbors: np.ndarray  # (n, k) int64, row i = out-neighbors of node i
    k: int

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]

    @property
    def num_edges(self) -> int:
        return self.neighbors.size

    def edges(self) -> np.ndarray:
        """(nk, 2) array of (source, target), grouped by source, 0-based."""
        n, k = self.neighbors.shape
        src = np.repeat(np.arange(n, dtype=np.int64), k)
        return np.column_stack([src, self.neighbors.reshape(-1)])

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.neighbors.reshape(-1), minlength=self.n)

    def in_neighbors(self) -> list[np.ndarray]:
        """D_i for every node i: sources of edges pointing at i."""
        e = self.edges()
        order = np.argsort(e[:, 1], kind="stable")
        sorted_src = e[order, 0]
        bounds = np.searchsorted(e[order, 1], np.arange(self.n + 1))
        return [sorted_src[bounds[i]:bounds[i + 1]] for i in range(self.n)]

    def has_edge_many(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Vectorized membership test for edges (u, v)."""
        sorted_nb = np.sort(self.neighbors, axis=1)
        rows = sorted_nb[u]
        pos = np.sum(rows < v[..., None], axis=-1)
        pos_clip = np.minimum(pos, self.k - 1)
        return np.take_along_axis(rows, pos_clip[..., None], axis=-1)[..., 0] == v

    def validate(self) -> None:
        n, k = self.neighbors.shape
        if np.any(self.neighbors == np.arange(n)[:, None]):
            raise ValidationError("graph contains a self loop")
        if np.any(self.neighbors < 0) or np.any(self.neighbors >= n):
            raise ValidationError("neighbor index out of range")
        for i in range(n):
            if np.unique(self.neighbors[i]).size != k:
                raise ValidationError(f"duplicate out-edge at node {i + 1}")


def _brute_force_neighbors(points: np.ndarray, k: int, block: int = 256) -> np.ndarray:
    """Blocked exact k-NN for the high-d regime; same tie rule as the tree path."""
    n = points.shape[0]
    sq = np.einsum("ij,ij->i", points, points)
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, block):
        stop = min(start + block, n)
        d2 = sq[start:stop, None] + sq[None, :] - 2.0 * (points[start:stop] @ points.T)
        np.maximum(d2, 0.0, out=d2)
        d2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        # exact (distance, index) order within the k selected requires the
        # full tie group; re-rank on the complete row instead
        cols = np.arange(n)
        for r in range(stop - start):
            row = d2[r]
            kth = row[part[r]].max()
            pool = np.flatnonzero(row <= kth)
            order = np.lexsort((cols[pool], row[pool]))
            out[start + r] = pool[order[:k]]
    return out


def build_graph(
    data,
    k: int,
    eps: float = 0.0,
    bucket_size: int = DEFAULT_BUCKET_SIZE,
    brute_force_dim_threshold: int = DEFAULT_BRUTE_FORCE_DIM,
) -> DirectedKnnGraph:
    """Build the directed (approximate) k-NN graph over the rows of `data`."""
    points = _as_array(data)
    n, d = points.shape
    if not 1 <= k <= n - 1:
        if k >= n:
            raise NotEnoughNeighbors(f"k={k} requires at least {k + 1} observations, got {n}")
        raise ValueError("k must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")

    if d > brute_force_dim_threshold:
        neighbors = _brute_force_neighbors(points, k)
        return DirectedKnnGraph(neighbors=neighbors, k=k)

    tree = build_kdtree(points, bucket_size=bucket_size)
    m = min(k + 2, n)
    dists, idx = tree.impl.query(points, k=m, eps=eps)
    neighbors = np.empty((n, k), dtype=np.int64)
    if eps > 0:
        for i in range(n):
            ids, _ = _rank_candidates(dists[i], idx[i], i, k)
            neighbors[i] = ids
        return DirectedKnnGraph(neighbors=neighbors, k=k)

    for i in range(n):
        di, ii = dists[i], idx[i]
        mi = m
        while True:
            keep = ii != i
            cand_d = di[keep]
            if mi == n or (cand_d.size >= k and cand_d[k - 1] < di[-1]):
                break
            mi = min(2 * mi, n)
            di, ii = tree.impl.query(points[i], k=mi)
        ids, _ = _rank_candidates(di, ii, i, k)
        neighbors[i] = ids
    return DirectedKnnGraph(neighbors=neighbors, k=k)


def save_graph(graph: DirectedKnnGraph, path) -> None:
    """Dump edges as CSV of 1-based "source,target" pairs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "target"])
        for s, t in graph.edges():
            writer.writerow([int(s) + 1, int(t) + 1])


def load_graph(path, n: int | None = None) -> DirectedKnnGraph:
    """Read a 1-based "source,target" edge CSV (constant out-degree required)."""
    pairs = []
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        for lineno, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if lineno == 1 and _header_row(cells):
                continue
            if len(cells) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 cells")
            try:
                s, t = int(cells[0]), int(cells[1])
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
            pairs.append((s - 1, t - 1))
    if not pairs:
        raise ParseError(f"{path}: no edges")
    arr = np.asarray(pairs, dtype=np.int64)
    n_seen = int(arr.max()) + 1
    n_nodes = n if n is not None else n_seen
    if n_seen > n_nodes or arr.min() < 0:
        raise ValidationError(f"{path}: node id out of range 1..{n_nodes}")
    counts = np.bincount(arr[:, 0], minlength=n_nodes)
    k = int(counts[0])
    if np.any(counts != k):
        raise ValidationError(f"{path}: out-degree is not constant across nodes")
    order = np.argsort(arr[:, 0], kind="stable")
    neighbors = arr[order, 1].reshape(n_nodes, k)
    graph = DirectedKnnGraph(neighbors=neighbors, k=k)
    graph.validate()
    return graph


def _header_row(cells) -> bool:
    for cell in cells:
        try:
            int(cell)
        except ValueError:
            return True
    return False
