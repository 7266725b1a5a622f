"""Immutable undirected CSR graph and the neighborhood algebra built on it."""

from __future__ import annotations

import logging
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class GraphError(ValueError):
    """Raised for malformed graph input or out-of-range node ids."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def merge_intersect(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Intersection of two strictly increasing sequences by linear merge."""
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        x, y = a[i], b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def merge_difference(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Elements of sorted ``a`` not present in sorted ``b``."""
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la:
        if j >= lb:
            out.extend(a[i:])
            break
        x, y = a[i], b[j]
        if x == y:
            i += 1
            j += 1
        elif x < y:
            out.append(x)
            i += 1
        else:
            j += 1
    return out


class Graph:
    """Undirected graph in CSR form with strictly sorted neighbor rows.

    Arrays are frozen after construction, so a Graph can be shared freely
    between readers. ``diagonal`` is only non-zero for graphs produced by
    :func:`power_graph`, where it keeps the closed-walk counts that are
    excluded from the neighbor lists.
    """

    def __init__(self, n: int, row_offsets: np.ndarray, col_indices: np.ndarray,
                 edge_weights: np.ndarray | None = None,
                 diagonal: np.ndarray | None = None, *, validate: bool = True):
        self.n = int(n)
        self.row_offsets = _readonly(np.asarray(row_offsets, dtype=np.int64).copy())
        self.col_indices = _readonly(np.asarray(col_indices, dtype=np.int64).copy())
        if edge_weights is None:
            edge_weights = np.ones(len(self.col_indices))
        self.edge_weights = _readonly(np.asarray(edge_weights, dtype=np.float64).copy())
        if diagonal is None:
            diagonal = np.zeros(self.n)
        self.diagonal = _readonly(np.asarray(diagonal, dtype=np.float64).copy())
        self.dropped_self_loops = 0
        if validate:
            self._validate()

    def _validate(self) -> None:
        ro, ci, w = self.row_offsets, self.col_indices, self.edge_weights
        if ro.shape != (self.n + 1,) or ro[0] != 0 or np.any(np.diff(ro) < 0):
            raise GraphError("row_offsets must be monotone of length n+1 starting at 0")
        if ro[-1] != len(ci) or len(w) != len(ci):
            raise GraphError("row_offsets, col_indices and edge_weights disagree in length")
        if len(ci) and (ci.min() < 0 or ci.max() >= self.n):
            raise GraphError("neighbor id out of range")
        if np.any(w < 0):
            raise GraphError("edge weights must be non-negative")
        rows = np.repeat(np.arange(self.n), np.diff(ro))
        if np.any(rows == ci):
            raise GraphError("self-loops are not allowed")
        # strictly increasing inside each row
        inner = np.ones(len(ci), dtype=bool)
        inner[ro[1:-1][ro[1:-1] < len(ci)]] = False
        if len(ci) > 1:
            steps = np.diff(ci)
            if np.any(steps[inner[1:]] <= 0):
                raise GraphError("neighbor lists must be strictly increasing")
        fwd = rows * self.n + ci
        rev = ci * self.n + rows
        order = np.argsort(rev, kind="stable")
        if not (np.array_equal(fwd, rev[order]) and np.array_equal(w, w[order])):
            raise GraphError("adjacency is not symmetric")

    # construction ----------------------------------------------------------

    @classmethod
    def from_edge_list(cls, pairs: Iterable[Sequence[int]], n: int,
                       weights: Sequence[float] | None = None) -> "Graph":
        """Build the symmetric closure of ``pairs``.

        Without weights, repeated pairs collapse to a single unit-weight edge.
        With weights, repeated pairs (in either orientation) sum their weights.
        Self-loops are dropped; their count is kept on ``dropped_self_loops``.
        """
        e = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs,
                       dtype=np.int64).reshape(-1, 2)
        if len(e) and (e.min() < 0 or e.max() >= n):
            bad = e[(e < 0).any(axis=1) | (e >= n).any(axis=1)][0]
            raise GraphError(f"edge {tuple(bad.tolist())} out of range for n={n}")
        w = None if weights is None else np.asarray(weights, dtype=np.float64)
        if w is not None and len(w) != len(e):
            raise GraphError("weights length does not match edge count")
        loops = e[:, 0] == e[:, 1]
        n_loops = int(loops.sum())
        if n_loops:
            logger.warning("dropped %d self-loop(s)", n_loops)
            e = e[~loops]
            w = None if w is None else w[~loops]
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        keys = lo * n + hi
        uniq, inv = np.unique(keys, return_inverse=True)
        if w is None:
            uw = np.ones(len(uniq))
        else:
            uw = np.zeros(len(uniq))
            np.add.at(uw, inv, w)
        g = cls._from_unique(n, uniq // n, uniq % n, uw)
        g.dropped_self_loops = n_loops
        return g

    @classmethod
    def _from_unique(cls, n: int, lo: np.ndarray, hi: np.ndarray, w: np.ndarray,
                     diagonal: np.ndarray | None = None) -> "Graph":
        rows = np.concatenate([lo, hi]).astype(np.int64)
        cols = np.concatenate([hi, lo]).astype(np.int64)
        ww = np.concatenate([w, w])
        order = np.lexsort((cols, rows))
        rows, cols, ww = rows[order], cols[order], ww[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=offsets[1:])
        return cls(n, offsets, cols, ww, diagonal, validate=False)

    @classmethod
    def from_scipy(cls, mat: sp.spmatrix, keep_diagonal: bool = False) -> "Graph":
        """Graph from a symmetric sparse matrix; the diagonal goes to ``diagonal``."""
        coo = sp.triu(sp.csr_matrix(mat), k=1).tocoo()
        mask = coo.data != 0
        diag = np.asarray(mat.diagonal(), dtype=np.float64) if keep_diagonal else None
        return cls._from_unique(mat.shape[0], coo.row[mask].astype(np.int64),
                                coo.col[mask].astype(np.int64), coo.data[mask], diag)

    # basic accessors -------------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.col_indices) // 2

    def _check(self, u: int) -> int:
        u = int(u)
        if not 0 <= u < self.n:
            raise GraphError(f"node {u} out of range for n={self.n}")
        return u

    def neighbors(self, u: int) -> np.ndarray:
        u = self._check(u)
        return self.col_indices[self.row_offsets[u]:self.row_offsets[u + 1]]

    def neighbor_weights(self, u: int) -> np.ndarray:
        u = self._check(u)
        return self.edge_weights[self.row_offsets[u]:self.row_offsets[u + 1]]

    def degree(self, u: int) -> int:
        u = self._check(u)
        return int(self.row_offsets[u + 1] - self.row_offsets[u])

    def weighted_degree(self, u: int) -> float:
        return float(self.neighbor_weights(u).sum())

    @cached_property
    def degrees(self) -> np.ndarray:
        return _readonly(np.diff(self.row_offsets))

    @cached_property
    def adjacency_lists(self) -> list[list[int]]:
        """Per-node neighbor lists as plain Python ints (fast scalar merges)."""
        cols = self.col_indices.tolist()
        ro = self.row_offsets.tolist()
        return [cols[ro[u]:ro[u + 1]] for u in range(self.n)]

    def weight(self, u: int, v: int) -> float:
        """A_uv, zero when the arc is absent (the diagonal for u == v)."""
        u, v = self._check(u), self._check(v)
        if u == v:
            return float(self.diagonal[u])
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        if k < len(nb) and nb[k] == v:
            return float(self.neighbor_weights(u)[k])
        return 0.0

    def has_edge(self, u: int, v: int) -> bool:
        u, v = self._check(u), self._check(v)
        nb = self.neighbors(u)
        k = np.searchsorted(nb, v)
        return bool(k < len(nb) and nb[k] == v)

    def edge_list(self) -> tuple[np.ndarray, np.ndarray]:
        """Each undirected edge once as (u < v), with its weight."""
        rows = np.repeat(np.arange(self.n), self.degrees)
        keep = rows < self.col_indices
        return (np.stack([rows[keep], self.col_indices[keep]], axis=1),
                self.edge_weights[keep].copy())

    @cached_property
    def arc_keys(self) -> np.ndarray:
        """Sorted ``u * n + v`` codes of every stored arc, for membership tests."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        return _readonly(rows * self.n + self.col_indices)

    def contains_pairs(self, pairs: np.ndarray) -> np.ndarray:
        """Vectorized edge membership for an (k, 2) array of node pairs."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        keys = pairs[:, 0] * self.n + pairs[:, 1]
        if not len(self.arc_keys):
            return np.zeros(len(keys), dtype=bool)
        pos = np.minimum(np.searchsorted(self.arc_keys, keys), len(self.arc_keys) - 1)
        return self.arc_keys[pos] == keys

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Weighted adjacency as scipy CSR (diagonal excluded)."""
        return sp.csr_matrix((self.edge_weights, self.col_indices, self.row_offsets),
                             shape=(self.n, self.n))

    @cached_property
    def pattern(self) -> sp.csr_matrix:
        """Binary adjacency pattern as scipy CSR."""
        return sp.csr_matrix((np.ones(len(self.col_indices)), self.col_indices,
                              self.row_offsets), shape=(self.n, self.n))

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_indices, other.col_indices)
                and np.array_equal(self.edge_weights, other.edge_weights))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def remove_edges(self, batch, return_count: bool = False):
        return remove_edges(self, batch, return_count=return_count)


# neighborhood algebra ------------------------------------------------------

def from_edge_list(pairs, n: int, weights=None) -> Graph:
    return Graph.from_edge_list(pairs, n, weights)


def common_neighbors(g: Graph, i: int, j: int) -> np.ndarray:
    """Sorted N(i) ∩ N(j)."""
    i, j = g._check(i), g._check(j)
    adj = g.adjacency_lists
    return np.array(merge_intersect(adj[i], adj[j]), dtype=np.int64)


def neighbor_difference(g: Graph, i: int, j: int) -> np.ndarray:
    """Sorted N(i) - N(j)."""
    i, j = g._check(i), g._check(j)
    adj = g.adjacency_lists
    return np.array(merge_difference(adj[i], adj[j]), dtype=np.int64)


def power_graph(g: Graph, l: int) -> Graph:
    """Graph of A^l: arc weights are walk counts (weighted walk sums).

    The diagonal of A^l is stored in ``diagonal`` and never shows up as a
    neighbor.
    """
    if l < 1:
        raise ValueError("power must be >= 1")
    if l == 1:
        return g
    cache = g.__dict__.setdefault("_powers", {})
    if l not in cache:
        a = g.matrix
        p = a
        for _ in range(l - 1):
            p = p @ a
        cache[l] = Graph.from_scipy(p, keep_diagonal=True)
    return cache[l]


def bfs_shells(g: Graph, u: int, k: int) -> list[np.ndarray]:
    """Exact-distance shells [N_1(u), ..., N_k(u)], each sorted."""
    u = g._check(u)
    adj = g.adjacency_lists
    seen = {u}
    frontier = [u]
    shells = []
    for _ in range(k):
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        nxt.sort()
        shells.append(np.array(nxt, dtype=np.int64))
        frontier = nxt
    return shells


def shortest_path_neighborhood(g: Graph, u: int, l: int) -> np.ndarray:
    """N_l(u): nodes at shortest-path distance exactly ``l`` from ``u``."""
    if l < 1:
        raise ValueError("distance must be >= 1")
    return bfs_shells(g, u, l)[-1]


def general_neighborhood(g: Graph, u: int, l1: int, l2: int) -> np.ndarray:
    """N_{l1}(u, A^{l2}): distance-``l1`` shell in the ``l2``-th power graph."""
    if l1 < 1 or l2 < 1:
        raise ValueError("neighborhood parameters must be >= 1")
    return shortest_path_neighborhood(power_graph(g, l2), u, l1)


def remove_edges(g: Graph, batch, return_count: bool = False):
    """Copy of ``g`` without the undirected edges in ``batch``.

    Absent edges are ignored. With ``return_count`` the number of edges
    actually removed is returned alongside the graph.
    """
    b = np.asarray(batch, dtype=np.int64).reshape(-1, 2)
    if not len(b) or not g.m:
        return (g, 0) if return_count else g
    if b.min() < 0 or b.max() >= g.n:
        raise GraphError("edge in batch out of range")
    keys = np.concatenate([b[:, 0] * g.n + b[:, 1], b[:, 1] * g.n + b[:, 0]])
    drop = np.isin(g.arc_keys, keys)
    removed = int(drop.sum()) // 2
    if not removed:
        return (g, 0) if return_count else g
    keep = ~drop
    rows = np.repeat(np.arange(g.n), g.degrees)[keep]
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=g.n), out=offsets[1:])
    out = Graph(g.n, offsets, g.col_indices[keep], g.edge_weights[keep], validate=False)
    return (out, removed) if return_count else out
