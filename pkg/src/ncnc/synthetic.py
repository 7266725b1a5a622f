"""Seeded graph generators for tests, benchmarks and the demo scripts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SyntheticGraph:
    n: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray
    times: np.ndarray | None = None


def cycle(n: int) -> np.ndarray:
    return np.array([(u, (u + 1) % n) for u in range(n)], dtype=np.int64)


def circulant(n: int, d: int) -> np.ndarray:
    """d-regular ring lattice: u is joined to u±1, ..., u±d/2 (d even, d < n)."""
    if d % 2 or not 0 < d < n:
        raise ValueError("d must be even and 0 < d < n")
    u = np.repeat(np.arange(n), d // 2)
    off = np.tile(np.arange(1, d // 2 + 1), n)
    return np.stack([u, (u + off) % n], axis=1)


def cora_like(seed=0, n: int = 2708, m: int = 5278, n_classes: int = 7,
              n_features: int = 500, words_per_node: int = 18,
              closure: float = 0.5, homophily: float = 0.8,
              topic_strength: float = 0.6) -> SyntheticGraph:
    """Citation-style graph with Cora's size and average degree (about 3.9).

    Nodes belong to ``n_classes`` communities of uneven size. Edges grow one
    at a time: with probability ``closure`` an existing path u-v-w is closed
    into a triangle, otherwise u links to a node chosen preferentially by
    degree, inside its own community with probability ``homophily``. Features
    are binary bags of words drawn from a community topic (probability
    ``topic_strength``) or a background vocabulary.
    """
    rng = np.random.default_rng(seed)
    sizes = rng.dirichlet(np.full(n_classes, 4.0))
    labels = rng.choice(n_classes, size=n, p=sizes)
    members = [np.flatnonzero(labels == c) for c in range(n_classes)]

    adj: list[set[int]] = [set() for _ in range(n)]
    edges: list[tuple[int, int]] = []
    deg = np.zeros(n)

    def link(u: int, v: int) -> bool:
        if u == v or v in adj[u]:
            return False
        adj[u].add(v)
        adj[v].add(u)
        edges.append((min(u, v), max(u, v)))
        deg[u] += 1
        deg[v] += 1
        return True

    def attach(u: int) -> int:
        pool = members[labels[u]] if rng.random() < homophily else np.arange(n)
        w = deg[pool] + 1.0
        return int(pool[rng.choice(len(pool), p=w / w.sum())])

    # every node gets at least one edge, as in a citation graph
    for u in rng.permutation(n):
        while not link(int(u), attach(int(u))):
            pass
    while len(edges) < m:
        if rng.random() < closure and edges:
            u, v = edges[rng.integers(len(edges))]
            if rng.random() < 0.5:
                u, v = v, u
            nb = list(adj[v] - {u})
            if nb:
                link(u, nb[rng.integers(len(nb))])
        else:
            u = int(rng.integers(n))
            link(u, attach(u))

    topic_words = n_features // (n_classes + 1)
    feats = np.zeros((n, n_features))
    for u in range(n):
        c = labels[u]
        topical = rng.random(words_per_node) < topic_strength
        words = np.where(topical,
                         c * topic_words + rng.integers(topic_words, size=words_per_node),
                         rng.integers(n_features, size=words_per_node))
        feats[u, words] = 1.0
    return SyntheticGraph(n, np.array(edges, dtype=np.int64), feats, labels)


def temporal_two_epoch(seed=0, n_old: int = 600, n_new: int = 300, m_old: int = 1800,
                       m_new: int = 900, closure: float = 0.6) -> SyntheticGraph:
    """Two-epoch preferential attachment with timestamps 0 and 1.

    Epoch-1 edges mostly join the newly arrived nodes to each other, so late
    edges are correlated with one another rather than with the old graph,
    the situation of a time-based split.
    """
    rng = np.random.default_rng(seed)
    n = n_old + n_new
    adj: list[set[int]] = [set() for _ in range(n)]
    edges: list[tuple[int, int]] = []
    times: list[int] = []
    deg = np.zeros(n)

    def link(u, v, t):
        if u == v or v in adj[u]:
            return False
        adj[u].add(v)
        adj[v].add(u)
        edges.append((min(u, v), max(u, v)))
        times.append(t)
        deg[u] += 1
        deg[v] += 1
        return True

    def grow(lo, hi, target, t, p_old=0.0):
        count = 0
        while count < target:
            if count and rng.random() < closure:
                k = len(edges) - 1 - rng.integers(count)
                u, v = edges[k]
                if rng.random() < 0.5:
                    u, v = v, u
                nb = [w for w in adj[v] if w != u and w >= lo]
                if nb and link(u, nb[rng.integers(len(nb))], t):
                    count += 1
                continue
            u = int(rng.integers(lo, hi))
            if rng.random() < p_old:
                pool = np.arange(0, lo)
            else:
                pool = np.arange(lo, hi)
            w = deg[pool] + 1.0
            v = int(pool[rng.choice(len(pool), p=w / w.sum())])
            if link(u, v, t):
                count += 1

    grow(0, n_old, m_old, 0)
    grow(n_old, n, m_new, 1, p_old=0.1)
    feats = np.ones((n, 1))
    labels = (np.arange(n) >= n_old).astype(np.int64)
    return SyntheticGraph(n, np.array(edges, dtype=np.int64), feats, labels,
                          np.array(times, dtype=np.int64))
