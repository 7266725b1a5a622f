"""GCN-style message passing producing node representations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .graph import Graph

PROPAGATIONS = ("sym_norm", "row_norm", "raw_sum")
ACTIVATIONS = {"relu": ad.relu, "identity": ad.identity}


def build_propagation(g: Graph, kind: str = "sym_norm") -> sp.csr_matrix:
    """Propagation matrix P used as the aggregation step.

    ``sym_norm`` is D~^-1/2 (A + I) D~^-1/2, ``row_norm`` is D~^-1 (A + I)
    and ``raw_sum`` is A itself, where D~ is the degree matrix of A + I.
    """
    if kind not in PROPAGATIONS:
        raise ValueError(f"unknown propagation {kind!r}; expected one of {PROPAGATIONS}")
    a = g.matrix
    if kind == "raw_sum":
        return a.tocsr()
    a_hat = (a + sp.identity(g.n, format="csr")).tocsr()
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    if kind == "sym_norm":
        d = sp.diags(1.0 / np.sqrt(deg))
        return (d @ a_hat @ d).tocsr()
    return (sp.diags(1.0 / deg) @ a_hat).tocsr()


@dataclass
class MpnnParams:
    """Layer weights W^(k) (F_{k-1} x F_k) and row biases b^(k) (1 x F_k).

    ``activation`` is applied after every layer except the last unless
    ``last_activation`` is set.
    """

    weights: list[ad.Tensor]
    biases: list[ad.Tensor]
    activation: str = "relu"
    propagation: str = "sym_norm"
    last_activation: bool = False

    def __post_init__(self):
        if not self.weights or len(self.weights) != len(self.biases):
            raise ValueError("need at least one layer and one bias per layer")
        for k in range(1, len(self.weights)):
            if self.weights[k - 1].shape[1] != self.weights[k].shape[0]:
                raise ValueError(f"layer {k} input dim does not chain")
        for w, b in zip(self.weights, self.biases):
            if b.shape != (1, w.shape[1]):
                raise ValueError("bias must be a 1 x F_k row")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.propagation not in PROPAGATIONS:
            raise ValueError(f"unknown propagation {self.propagation!r}")

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[1]

    def named_parameters(self) -> list[tuple[str, ad.Tensor]]:
        out = []
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            out += [(f"mpnn.W{k}", w), (f"mpnn.b{k}", b)]
        return out


def xavier_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_mpnn(in_dim: int, dims: list[int], rng: np.random.Generator, *,
              activation: str = "relu", propagation: str = "sym_norm",
              last_activation: bool = False) -> MpnnParams:
    weights, biases = [], []
    prev = in_dim
    for d in dims:
        weights.append(ad.Tensor(xavier_uniform(prev, d, rng), requires_grad=True))
        biases.append(ad.Tensor(np.zeros((1, d)), requires_grad=True))
        prev = d
    return MpnnParams(weights, biases, activation, propagation, last_activation)


def mpnn_forward(g: Graph, x, params: MpnnParams,
                 propagation: sp.spmatrix | None = None, *, dropout: float = 0.0,
                 rng: np.random.Generator | None = None) -> ad.Tensor:
    """h^(0) = X, h^(k) = act(P h^(k-1) W^(k) + b^(k)); returns h^(K).

    Run this once per input graph and reuse the result for every target
    link scored on that graph. Dropout on each layer input is applied only
    when an ``rng`` is given (training).
    """
    x = ad.as_tensor(x)
    if x.shape[0] != g.n:
        raise ad.ShapeError(f"features have {x.shape[0]} rows for {g.n} nodes")
    if x.shape[1] != params.weights[0].shape[0]:
        raise ad.ShapeError("feature width does not match first layer")
    p = propagation if propagation is not None else build_propagation(g, params.propagation)
    act = ACTIVATIONS[params.activation]
    h = x
    last = params.num_layers - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = ad.dropout(h, dropout, rng)
        # P (h W) is cheaper than (P h) W whenever F_k < F_{k-1}
        if w.shape[1] <= w.shape[0]:
            h = ad.spmm(p, ad.matmul(h, w))
        else:
            h = ad.matmul(ad.spmm(p, h), w)
        h = ad.add(h, b)
        if k < last or params.last_activation:
            h = act(h)
    return h
