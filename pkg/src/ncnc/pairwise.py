"""Hand-crafted pairwise link features and the framework that unifies them.

A :class:`PairwiseConfig` describes

    sum over u in N_{l1}^{l2}(i) (op) N_{l1'}^{l2'}(j) of g(A^{l2}_iu) g(A^{l2'}_ju) f(d(u))

where N_{a}^{b}(v) is the distance-``a`` shell of v in the ``b``-th power
graph and ``op`` is intersection or a one-sided difference. CN, RA, AA, the
Neo-GNN overlap terms and the BUDDY overlap counts are presets of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .graph import (Graph, bfs_shells, general_neighborhood, merge_difference,
                    merge_intersect, power_graph)

SET_OPS = ("intersection", "left_difference", "right_difference")


def _node_fn(name) -> Callable[[float], float]:
    if callable(name):
        return name
    table = {
        "constant_one": lambda d: 1.0,
        "inverse_degree": lambda d: 1.0 / d,
        # a degree-1 node only shows up when i == j; it contributes 0
        "inverse_log_degree": lambda d: 1.0 / math.log(d) if d > 1 else 0.0,
    }
    if name not in table:
        raise ValueError(f"unknown node function {name!r}")
    return table[name]


def _weight_fn(spec) -> Callable[[float], float]:
    if callable(spec):
        return spec
    if isinstance(spec, Mapping):
        return lambda x: float(spec[x])
    if spec == "constant_one":
        return lambda x: 1.0
    if spec == "raw_weight":
        return lambda x: x
    raise ValueError(f"unknown weight function {spec!r}")


@dataclass(frozen=True)
class PairwiseConfig:
    """One point of the pairwise-feature framework.

    ``weight_fn`` is ``constant_one`` (edge existence), ``raw_weight``
    (walk counts of the power graph) or a mapping/callable; ``node_fn`` is
    ``constant_one``, ``inverse_degree``, ``inverse_log_degree`` or a
    callable of the degree.
    """

    left: tuple[int, int] = (1, 1)
    right: tuple[int, int] = (1, 1)
    set_op: str = "intersection"
    weight_fn: object = "constant_one"
    node_fn: object = "constant_one"

    def __post_init__(self):
        if min(*self.left, *self.right) < 1:
            raise ValueError("neighborhood parameters must be >= 1")
        if self.set_op not in SET_OPS:
            raise ValueError(f"unknown set operator {self.set_op!r}")
        _weight_fn(self.weight_fn)
        _node_fn(self.node_fn)


PRESETS = {
    "CN": PairwiseConfig(),
    "RA": PairwiseConfig(node_fn="inverse_degree"),
    "AA": PairwiseConfig(node_fn="inverse_log_degree"),
}


def heuristic_score(g: Graph, i: int, j: int, kind: str) -> float:
    """CN count, RA sum of 1/d(u) or AA sum of 1/ln d(u) over N(i) ∩ N(j)."""
    i, j = g._check(i), g._check(j)
    adj = g.adjacency_lists
    cn = merge_intersect(adj[i], adj[j])
    kind = kind.upper()
    if kind == "CN":
        return float(len(cn))
    deg = g.degrees
    if kind == "RA":
        return float(sum(1.0 / deg[u] for u in cn))
    if kind == "AA":
        return float(sum(1.0 / math.log(deg[u]) for u in cn if deg[u] > 1))
    raise ValueError(f"unknown heuristic {kind!r}")


def _neighborhood(g: Graph, u: int, spec: tuple[int, int]) -> list[int]:
    l1, l2 = spec
    if l1 == 1 and l2 == 1:
        return g.adjacency_lists[u]
    return general_neighborhood(g, u, l1, l2).tolist()


def general_pairwise(g: Graph, i: int, j: int, cfg: PairwiseConfig) -> float:
    """Evaluate the framework sum for the link (i, j).

    For the difference operators the excluded side contributes a factor of 1.
    """
    i, j = g._check(i), g._check(j)
    left = _neighborhood(g, i, cfg.left)
    right = _neighborhood(g, j, cfg.right)
    wf, nf = _weight_fn(cfg.weight_fn), _node_fn(cfg.node_fn)
    deg = g.degrees
    trivial_w = cfg.weight_fn == "constant_one"
    if cfg.set_op == "intersection":
        nodes = merge_intersect(left, right)
        if trivial_w:
            return float(sum(nf(deg[u]) for u in nodes))
        gi, gj = power_graph(g, cfg.left[1]), power_graph(g, cfg.right[1])
        return float(sum(wf(gi.weight(i, u)) * wf(gj.weight(j, u)) * nf(deg[u])
                         for u in nodes))
    if cfg.set_op == "left_difference":
        nodes, anchor, pg = merge_difference(left, right), i, cfg.left[1]
    else:
        nodes, anchor, pg = merge_difference(right, left), j, cfg.right[1]
    if trivial_w:
        return float(sum(nf(deg[u]) for u in nodes))
    ga = power_graph(g, pg)
    return float(sum(wf(ga.weight(anchor, u)) * nf(deg[u]) for u in nodes))


# Neo-GNN -------------------------------------------------------------------

@dataclass(frozen=True)
class NeoGnnConfig:
    l: int = 2
    beta: float = 0.5
    f: object = "constant_one"

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("l must be >= 1")
        if not 0 <= self.beta <= 1:
            raise ValueError("beta must lie in [0, 1]")


def neo_gnn_term(l1: int, l2: int, f="constant_one") -> PairwiseConfig:
    """Framework preset for z_{l1 l2}: A^{l}-neighborhoods, walk-count weights."""
    return PairwiseConfig((1, l1), (1, l2), "intersection", "raw_weight", f)


def neo_gnn_feature(g: Graph, i: int, j: int, cfg: NeoGnnConfig) -> float:
    """sum_{l1,l2 <= l} beta^(l1+l2-2) z_{l1 l2}(i, j), with 0^0 = 1."""
    i, j = g._check(i), g._check(j)
    nf = _node_fn(cfg.f)
    deg = g.degrees
    powers = [power_graph(g, l) for l in range(1, cfg.l + 1)]
    total = 0.0
    for l1, gi in enumerate(powers, start=1):
        ni, wi = gi.neighbors(i), gi.neighbor_weights(i)
        for l2, gj in enumerate(powers, start=1):
            decay = 1.0 if l1 + l2 == 2 else cfg.beta ** (l1 + l2 - 2)
            if decay == 0.0:
                continue
            nj, wj = gj.neighbors(j), gj.neighbor_weights(j)
            common, ai, aj = np.intersect1d(ni, nj, assume_unique=True, return_indices=True)
            z = sum(wi[a] * wj[b] * nf(deg[u]) for u, a, b in zip(common, ai, aj))
            total += decay * z
    return float(total)


# BUDDY ---------------------------------------------------------------------

@dataclass(frozen=True)
class BuddyConfig:
    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def buddy_overlap_term(l1: int, l2: int) -> PairwiseConfig:
    """Framework preset for a_{l1 l2}: exact-distance shells, unit weights."""
    return PairwiseConfig((l1, 1), (l2, 1))


def buddy_features(g: Graph, i: int, j: int, cfg: BuddyConfig) -> np.ndarray:
    """Exact BUDDY counts: k*k overlaps (row-major), then b_l(i,j), then b_l(j,i)."""
    i, j = g._check(i), g._check(j)
    k = cfg.k
    si = [s.tolist() for s in bfs_shells(g, i, k)]
    sj = [s.tolist() for s in bfs_shells(g, j, k)]
    a = [len(merge_intersect(si[x], sj[y])) for x in range(k) for y in range(k)]
    reach_i = sorted(set().union(*si))
    reach_j = sorted(set().union(*sj))
    b_ij = [len(merge_difference(si[x], reach_j)) for x in range(k)]
    b_ji = [len(merge_difference(sj[x], reach_i)) for x in range(k)]
    return np.array(a + b_ij + b_ji, dtype=np.float64)


# vectorized CN counts, used by analysis and the CLI ----------------------------

def cn_counts(g: Graph, pairs) -> np.ndarray:
    """|N(i) ∩ N(j)| for each row of an (k, 2) pair array."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        return np.zeros(0, dtype=np.int64)
    c = g.pattern[pairs[:, 0]].multiply(g.pattern[pairs[:, 1]])
    return np.asarray(c.sum(axis=1)).ravel().astype(np.int64)


def heuristic_scores(g: Graph, pairs, kind: str) -> np.ndarray:
    """Vectorized CN / RA / AA over many links."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    kind = kind.upper()
    if kind == "CN":
        return cn_counts(g, pairs).astype(np.float64)
    deg = g.degrees.astype(np.float64)
    with np.errstate(divide="ignore"):
        if kind == "RA":
            node_w = np.where(deg > 0, 1.0 / np.maximum(deg, 1), 0.0)
        elif kind == "AA":
            node_w = np.where(deg > 1, 1.0 / np.log(np.maximum(deg, 2)), 0.0)
        else:
            raise ValueError(f"unknown heuristic {kind!r}")
    if not len(pairs):
        return np.zeros(0)
    c = g.pattern[pairs[:, 0]].multiply(g.pattern[pairs[:, 1]]).tocsr()
    return np.asarray(c @ node_w).ravel()
