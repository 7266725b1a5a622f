"""Link scorers built on MPNN node representations.

All scoring functions are batched: ``i`` and ``j`` may be scalars or
equal-length integer arrays, and results have one row per target link.
Logit-level functions return :class:`~ncnc.autodiff.Tensor` so they can run
inside a training tape; the ``*_score`` wrappers return probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .graph import Graph, power_graph
from .mpnn import MpnnParams, init_mpnn, mpnn_forward, xavier_uniform

VARIANTS = ("gae", "ncn", "ncn_diff", "ncn2", "ncnc")


def _pairs(i, j) -> tuple[np.ndarray, np.ndarray]:
    src = np.atleast_1d(np.asarray(i, dtype=np.int64))
    dst = np.atleast_1d(np.asarray(j, dtype=np.int64))
    if src.shape != dst.shape or src.ndim != 1:
        raise ValueError("i and j must be scalars or equal-length 1-D arrays")
    return src, dst


def _rows(mat: sp.csr_matrix, idx: np.ndarray) -> sp.csr_matrix:
    return mat[idx]


def cn_incidence(g: Graph, i, j) -> sp.csr_matrix:
    """B x n binary matrix whose row b marks N(i_b) ∩ N(j_b)."""
    src, dst = _pairs(i, j)
    c = _rows(g.pattern, src).multiply(_rows(g.pattern, dst)).tocsr()
    c.eliminate_zeros()
    return c


def _difference(a: sp.csr_matrix, c: sp.csr_matrix) -> sp.csr_matrix:
    d = (a - c).tocsr()
    d.eliminate_zeros()
    return d


# GAE -----------------------------------------------------------------------

def gae_logits(h, i, j) -> ad.Tensor:
    src, dst = _pairs(i, j)
    return ad.row_sum(ad.hadamard(ad.gather_rows(h, src), ad.gather_rows(h, dst)))


def gae_score(h, i, j) -> np.ndarray:
    """sigmoid(h_i . h_j) for each target link."""
    return ad.sigmoid(gae_logits(h, i, j)).data[:, 0]


# NCN -----------------------------------------------------------------------

@dataclass
class PredictorParams:
    """MLP stack mapping a link representation z_ij to one logit.

    With ``norm`` each hidden pre-activation is layer-normalized.
    """

    weights: list[ad.Tensor]
    biases: list[ad.Tensor]
    norm: bool = False

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[0]

    def named_parameters(self) -> list[tuple[str, ad.Tensor]]:
        out = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            out += [(f"mlp.W{k}", w), (f"mlp.b{k}", b)]
        return out


def init_predictor(in_dim: int, hidden: list[int], rng: np.random.Generator,
                   norm: bool = False) -> PredictorParams:
    dims = [in_dim, *hidden, 1]
    ws = [ad.Tensor(xavier_uniform(a, b, rng), requires_grad=True)
          for a, b in zip(dims[:-1], dims[1:])]
    bs = [ad.Tensor(np.zeros((1, b)), requires_grad=True) for b in dims[1:]]
    return PredictorParams(ws, bs, norm)


def mlp_forward(params: PredictorParams, z, dropout: float = 0.0,
                rng: np.random.Generator | None = None) -> ad.Tensor:
    h = ad.as_tensor(z)
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = ad.add(ad.matmul(h, w), b)
        if k < last:
            if params.norm:
                h = ad.layer_norm(h)
            h = ad.dropout(ad.relu(h), dropout, rng)
    return h


def ncn_feature(g: Graph, h, i, j) -> ad.Tensor:
    """Sum of h_u over common neighbors u of each target; zero when none."""
    return ad.spmm(cn_incidence(g, i, j), h)


def ncn_variant_feature(g: Graph, h, i, j, variant: str) -> ad.Tensor:
    """The pooled block a variant appends to the NCN representation.

    ``ncn_diff`` pools N(i) - N(j) plus N(j) - N(i); ``ncn2`` pools
    N(i, A^2) ∩ N(j) plus N(i) ∩ N(j, A^2). The two halves are summed, not
    concatenated, so the score stays symmetric in (i, j).
    """
    src, dst = _pairs(i, j)
    pi, pj = _rows(g.pattern, src), _rows(g.pattern, dst)
    if variant == "ncn_diff":
        c = pi.multiply(pj).tocsr()
        block = _difference(pi, c) + _difference(pj, c)
    elif variant == "ncn2":
        p2 = power_graph(g, 2).pattern
        block = pi.multiply(_rows(p2, dst)) + _rows(p2, src).multiply(pj)
    else:
        raise ValueError(f"variant {variant!r} has no extra pairwise block")
    return ad.spmm(sp.csr_matrix(block), h)


def _hadamard_term(h, src, dst) -> ad.Tensor:
    return ad.hadamard(ad.gather_rows(h, src), ad.gather_rows(h, dst))


def ncn_logits(g: Graph, h, i, j, params: PredictorParams, dropout: float = 0.0,
               rng: np.random.Generator | None = None) -> ad.Tensor:
    src, dst = _pairs(i, j)
    z = ad.concat_cols(_hadamard_term(h, src, dst), ncn_feature(g, h, src, dst))
    return mlp_forward(params, z, dropout, rng)


def ncn_score(g: Graph, h, i, j, params: PredictorParams) -> np.ndarray:
    """sigmoid(MLP(h_i ⊙ h_j || sum of common-neighbor representations))."""
    return ad.sigmoid(ncn_logits(g, h, i, j, params)).data[:, 0]


def ncn_variant_logits(g: Graph, h, i, j, params: PredictorParams, variant: str,
                       dropout: float = 0.0, rng: np.random.Generator | None = None) -> ad.Tensor:
    src, dst = _pairs(i, j)
    z = ad.concat_cols(_hadamard_term(h, src, dst), ncn_feature(g, h, src, dst),
                       ncn_variant_feature(g, h, src, dst, variant))
    return mlp_forward(params, z, dropout, rng)


# completion ----------------------------------------------------------------

@dataclass
class CompletionWeights:
    """Candidate common neighbors of one target link and their probabilities."""

    i: int
    j: int
    nodes: np.ndarray
    probs: np.ndarray

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.nodes.tolist(), self.probs.tolist()))


def completion_probs(g: Graph, h, i: int, j: int,
                     scorer: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> CompletionWeights:
    """Probability that each u in N(i) ∪ N(j) is a common neighbor of (i, j).

    Observed common neighbors get 1. A node seen from one endpoint only gets
    the scorer's probability for the missing link. Nodes outside both
    neighborhoods are left out (probability 0). The endpoints themselves are
    never candidates.
    """
    ni, nj = g.neighbors(i), g.neighbors(j)
    both = np.intersect1d(ni, nj, assume_unique=True)
    only_j = np.setdiff1d(nj, ni, assume_unique=True)
    only_i = np.setdiff1d(ni, nj, assume_unique=True)
    only_j = only_j[(only_j != i) & (only_j != j)]
    only_i = only_i[(only_i != i) & (only_i != j)]
    p_j = np.asarray(scorer(np.full(len(only_j), i), only_j), dtype=np.float64).reshape(-1)
    p_i = np.asarray(scorer(np.full(len(only_i), j), only_i), dtype=np.float64).reshape(-1)
    nodes = np.concatenate([both, only_j, only_i])
    probs = np.concatenate([np.ones(len(both)), p_j, p_i])
    order = np.argsort(nodes, kind="stable")
    return CompletionWeights(int(i), int(j), nodes[order], probs[order])


def ncnc_logits(g: Graph, h, i, j, params: PredictorParams, k: int,
                detach_completion: bool = False, dropout: float = 0.0,
                rng: np.random.Generator | None = None,
                completion_offset: float = 0.0) -> ad.Tensor:
    """NCNC-k logits; k = 0 is plain NCN.

    For k > 0 the common-neighbor pool is replaced by
    ``sum_CN h_u + sum_{N(j)-N(i)} p(i,u) h_u + sum_{N(i)-N(j)} p(j,u) h_u``
    where p is the NCNC-(k-1) probability from the same parameters. The node
    representations ``h`` are shared across all completion rounds.

    ``completion_offset`` shifts the inner logits before the sigmoid,
    ``p = sigmoid(logit - offset)``. Training on balanced positives and
    negatives calibrates p to a 50% edge prior; a positive offset moves it
    toward the much lower true edge density. Zero gives the plain formula.
    """
    if k < 0:
        raise ValueError("completion depth must be >= 0")
    if k == 0:
        return ncn_logits(g, h, i, j, params, dropout, rng)
    src, dst = _pairs(i, j)
    b = len(src)
    pi, pj = _rows(g.pattern, src), _rows(g.pattern, dst)
    c = pi.multiply(pj).tocsr()
    c.eliminate_zeros()
    only_j = _difference(pj, c).tocoo()
    only_i = _difference(pi, c).tocoo()
    rows = np.concatenate([only_j.row, only_i.row]).astype(np.int64)
    cols = np.concatenate([only_j.col, only_i.col]).astype(np.int64)
    anchor = np.concatenate([src[only_j.row], dst[only_i.row]])
    keep = (cols != src[rows]) & (cols != dst[rows])
    rows, cols, anchor = rows[keep], cols[keep], anchor[keep]
    pooled = ad.spmm(c, h)
    if len(rows):
        inner = ncnc_logits(g, h, anchor, cols, params, k - 1, detach_completion,
                            dropout, rng, completion_offset)
        if completion_offset:
            inner = ad.add(inner, ad.Tensor(np.full(inner.shape, -completion_offset)))
        inner = ad.sigmoid(inner)
        if detach_completion:
            inner = ad.detach(inner)
        pooled = ad.add(pooled, ad.weighted_spmm(rows, cols, inner, h, b))
    z = ad.concat_cols(_hadamard_term(h, src, dst), pooled)
    return mlp_forward(params, z, dropout, rng)


def ncnc_score(g: Graph, h, i, j, params: PredictorParams, k: int) -> np.ndarray:
    return ad.sigmoid(ncnc_logits(g, h, i, j, params, k)).data[:, 0]


# full model ----------------------------------------------------------------

@dataclass
class LinkModel:
    """An MPNN encoder plus one of the link predictors.

    ``variant`` is one of ``gae``, ``ncn``, ``ncn_diff``, ``ncn2`` or
    ``ncnc``; ``depth`` is the completion depth K for ``ncnc``. ``dropout``
    only acts when a training ``rng`` is passed to :meth:`embed`/:meth:`logits`.
    """

    mpnn: MpnnParams
    predictor: PredictorParams | None
    variant: str = "ncn"
    depth: int = 0
    detach_completion: bool = False
    dropout: float = 0.0
    completion_offset: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.variant != "gae":
            if self.predictor is None:
                raise ValueError(f"variant {self.variant!r} needs predictor params")
            blocks = 3 if self.variant in ("ncn_diff", "ncn2") else 2
            if self.predictor.in_dim != blocks * self.mpnn.out_dim:
                raise ValueError("predictor input dim does not match link representation")

    def named_parameters(self) -> list[tuple[str, ad.Tensor]]:
        out = self.mpnn.named_parameters()
        if self.predictor is not None:
            out += self.predictor.named_parameters()
        return out

    def parameters(self) -> list[ad.Tensor]:
        return [t for _, t in self.named_parameters()]

    def embed(self, g: Graph, x, rng: np.random.Generator | None = None) -> ad.Tensor:
        return mpnn_forward(g, x, self.mpnn, dropout=self.dropout, rng=rng)

    def logits(self, g: Graph, h, i, j, rng: np.random.Generator | None = None) -> ad.Tensor:
        if self.variant == "gae":
            return gae_logits(h, i, j)
        if self.variant in ("ncn_diff", "ncn2"):
            return ncn_variant_logits(g, h, i, j, self.predictor, self.variant,
                                      self.dropout, rng)
        depth = self.depth if self.variant == "ncnc" else 0
        return ncnc_logits(g, h, i, j, self.predictor, depth, self.detach_completion,
                           self.dropout, rng, self.completion_offset)

    def predict_proba(self, g: Graph, x, pairs, batch_size: int = 8192) -> np.ndarray:
        """Forward-only link probabilities; MPNN runs once for all pairs."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        h = self.embed(g, x).data
        out = np.empty(len(pairs))
        for s in range(0, len(pairs), batch_size):
            chunk = pairs[s:s + batch_size]
            out[s:s + len(chunk)] = ad.sigmoid(
                self.logits(g, h, chunk[:, 0], chunk[:, 1])).data[:, 0]
        return out

    def snapshot(self) -> list[np.ndarray]:
        return [t.data.copy() for t in self.parameters()]

    def restore(self, values: list[np.ndarray]) -> None:
        for t, v in zip(self.parameters(), values, strict=True):
            t.data[...] = v


def init_link_model(in_dim: int, variant: str = "ncn", *, depth: int = 1,
                    hidden: int = 64, layers: int = 2, mlp_hidden: int = 64,
                    mlp_layers: int = 2, propagation: str = "sym_norm",
                    seed: int = 0, detach_completion: bool = False,
                    dropout: float = 0.0, mlp_norm: bool = False,
                    completion_offset: float = 0.0) -> LinkModel:
    """Xavier-initialized model; defaults are 2 GCN layers of width 64."""
    rng = np.random.default_rng(seed)
    mpnn = init_mpnn(in_dim, [hidden] * layers, rng, propagation=propagation)
    predictor = None
    if variant != "gae":
        blocks = 3 if variant in ("ncn_diff", "ncn2") else 2
        predictor = init_predictor(blocks * hidden, [mlp_hidden] * (mlp_layers - 1), rng,
                                   mlp_norm)
    return LinkModel(mpnn, predictor, variant, depth if variant == "ncnc" else 0,
                     detach_completion, dropout, completion_offset)
