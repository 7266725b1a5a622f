"""Ranking metrics and edge splits for link prediction evaluation.

Ties between a positive and a negative always count against the positive.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .sampling import sample_negatives


def hits_at_k(pos_scores, neg_scores, k: int) -> float:
    """Fraction of positives scoring strictly above the k-th best negative.

    With fewer than ``k`` negatives every positive is a hit.
    """
    if k < 1:
        raise ValueError("K must be >= 1")
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    neg = np.asarray(neg_scores, dtype=np.float64).ravel()
    if not len(pos):
        raise ValueError("need at least one positive score")
    if len(neg) < k:
        return 1.0
    kth = np.partition(neg, len(neg) - k)[len(neg) - k]
    return float(np.mean(pos > kth))


def mrr(pos_scores, neg_scores) -> float:
    """Mean reciprocal rank; item ``t`` is ranked among ``neg_scores[t]``.

    ``neg_scores`` may be a 2-D array (one row of negatives per positive) or a
    1-D array shared by every positive.
    """
    pos = np.asarray(pos_scores, dtype=np.float64).ravel()
    if not len(pos):
        raise ValueError("need at least one positive score")
    neg = np.asarray(neg_scores, dtype=np.float64)
    if neg.ndim == 1:
        neg = np.broadcast_to(neg, (len(pos), len(neg)))
    if neg.shape[0] != len(pos):
        raise ValueError("one row of negatives per positive required")
    rank = 1 + (neg >= pos[:, None]).sum(axis=1)
    return float(np.mean(1.0 / rank))


@dataclass(frozen=True)
class MetricSpec:
    name: str
    k: int | None = None

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        text = text.strip().lower()
        if text == "mrr":
            return cls("mrr")
        m = re.fullmatch(r"hits@(\d+)", text)
        if not m or int(m.group(1)) < 1:
            raise ValueError(f"metric must be hits@K or mrr, got {text!r}")
        return cls("hits", int(m.group(1)))

    def __str__(self) -> str:
        return "mrr" if self.name == "mrr" else f"hits@{self.k}"

    def __call__(self, pos, neg) -> float:
        return mrr(pos, neg) if self.name == "mrr" else hits_at_k(pos, neg, self.k)


@dataclass
class EvalSplit:
    """Disjoint train/valid/test positives plus negatives drawn off the full graph."""

    n: int
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    valid_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    test_neg: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    metric: MetricSpec = field(default_factory=lambda: MetricSpec("hits", 100))

    def train_graph(self) -> Graph:
        return Graph.from_edge_list(self.train, self.n)

    def full_graph(self) -> Graph:
        return Graph.from_edge_list(np.concatenate([self.train, self.valid, self.test]), self.n)

    def inference_graph(self, use_valid_edges: bool = False) -> Graph:
        """Input graph for test-time scoring; optionally adds validation edges."""
        if use_valid_edges:
            return Graph.from_edge_list(np.concatenate([self.train, self.valid]), self.n)
        return self.train_graph()


def random_split(edges, ratios=(0.7, 0.1, 0.2), seed=0, *, n: int | None = None,
                 negatives: bool = True, metric: str = "hits@100") -> EvalSplit:
    """Seeded shuffle of the undirected edges, partitioned train/valid/test.

    Valid and test sizes are rounded from their ratios; training takes the
    rest. With ``negatives`` one non-edge of the full graph is sampled per
    valid and per test positive.
    """
    r = np.asarray(ratios, dtype=np.float64)
    if r.shape != (3,) or np.any(r < 0) or not np.isclose(r.sum(), 1.0):
        raise ValueError(f"ratios must be three non-negative numbers summing to 1, got {ratios}")
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    e = np.unique(np.sort(e, axis=1), axis=0)
    e = e[e[:, 0] != e[:, 1]]
    if n is None:
        n = int(e.max()) + 1 if len(e) else 0
    rng = np.random.default_rng(seed)
    e = e[rng.permutation(len(e))]
    m = len(e)
    n_valid = int(round(r[1] * m))
    n_test = int(round(r[2] * m))
    n_valid = min(n_valid, m)
    n_test = min(n_test, m - n_valid)
    n_train = m - n_valid - n_test
    split = EvalSplit(n, e[:n_train], e[n_train:n_train + n_valid],
                      e[n_train + n_valid:], metric=MetricSpec.parse(metric))
    if negatives and (n_valid or n_test):
        full = Graph.from_edge_list(e, n)
        neg = sample_negatives(full, n_valid + n_test, rng)
        split.valid_neg, split.test_neg = neg[:n_valid], neg[n_valid:]
    return split
