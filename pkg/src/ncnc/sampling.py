"""Uniform negative-pair sampling."""

from __future__ import annotations

import numpy as np

from .graph import Graph


class NoNegativesError(ValueError):
    """The graph has fewer non-edges than the requested sample size."""


def sample_negatives(g: Graph, count: int, seed=None, *,
                     exclude: np.ndarray | None = None) -> np.ndarray:
    """Draw ``count`` distinct unordered node pairs that are not edges of ``g``.

    Rejection sampling: candidates that are self-pairs, edges, duplicates or
    listed in ``exclude`` are redrawn. ``seed`` may be an int or a Generator.
    Returned pairs are ordered (u < v) in draw order.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return np.zeros((0, 2), dtype=np.int64)
    n = g.n
    banned = np.zeros(0, dtype=np.int64)
    if exclude is not None and len(exclude):
        ex = np.asarray(exclude, dtype=np.int64).reshape(-1, 2)
        banned = np.unique(np.minimum(ex[:, 0], ex[:, 1]) * n + np.maximum(ex[:, 0], ex[:, 1]))
    available = n * (n - 1) // 2 - g.m - len(banned)
    if available < count:
        raise NoNegativesError(f"only {max(available, 0)} non-edges available, "
                               f"{count} requested")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chosen: list[np.ndarray] = []
    seen = np.zeros(0, dtype=np.int64)
    need = count
    while need > 0:
        draw = max(2 * need, 16)
        u = rng.integers(0, n, size=draw)
        v = rng.integers(0, n, size=draw)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        ok = lo != hi
        lo, hi = lo[ok], hi[ok]
        keys = lo * n + hi
        ok = ~g.contains_pairs(np.stack([lo, hi], axis=1))
        if len(banned):
            ok &= ~np.isin(keys, banned)
        if len(seen):
            ok &= ~np.isin(keys, seen)
        keys = keys[ok]
        _, first = np.unique(keys, return_index=True)
        keys = keys[np.sort(first)][:need]
        chosen.append(keys)
        seen = np.concatenate([seen, keys])
        need -= len(keys)
    keys = np.concatenate(chosen)
    return np.stack([keys // n, keys % n], axis=1)
