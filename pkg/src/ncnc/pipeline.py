"""Training loop: negative sampling, target link removal, BCE and Adam."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .graph import Graph, remove_edges
from .metrics import EvalSplit, MetricSpec
from .predictors import LinkModel, init_link_model
from .sampling import NoNegativesError, sample_negatives

__all__ = ["TrainConfig", "AdamState", "adam_step", "tlr_batch", "train_epoch",
           "evaluate", "fit", "TrainResult", "sample_negatives", "NoNegativesError"]

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 512
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    neg_ratio: int = 1
    seed: int = 0
    tlr: bool = True
    variant: str = "ncn"
    depth: int = 1
    hidden: int = 64
    layers: int = 2
    mlp_hidden: int = 64
    mlp_layers: int = 2
    propagation: str = "sym_norm"
    detach_completion: bool = False
    dropout: float = 0.0
    mlp_norm: bool = False
    weight_decay: float = 0.0
    completion_warmup: int = 0
    completion_offset: float = 0.0
    metric: str = "hits@100"
    eval_every: int = 1
    use_valid_edges: bool = False

    def __post_init__(self):
        if not 1 <= self.epochs <= 100:
            raise ValueError("epochs must be in [1, 100]")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.neg_ratio < 1:
            raise ValueError("neg_ratio must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0 <= self.completion_warmup < self.epochs:
            raise ValueError("completion_warmup must be in [0, epochs)")
        MetricSpec.parse(self.metric)

    def build_model(self, in_dim: int) -> LinkModel:
        return init_link_model(in_dim, self.variant, depth=self.depth, hidden=self.hidden,
                               layers=self.layers, mlp_hidden=self.mlp_hidden,
                               mlp_layers=self.mlp_layers, propagation=self.propagation,
                               seed=self.seed, detach_completion=self.detach_completion,
                               dropout=self.dropout, mlp_norm=self.mlp_norm,
                               completion_offset=self.completion_offset)


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    step: int = 0

    @classmethod
    def for_params(cls, params: list[ad.Tensor]) -> "AdamState":
        return cls([np.zeros_like(p.data) for p in params],
                   [np.zeros_like(p.data) for p in params])


def adam_step(params: list[ad.Tensor], grads: list[np.ndarray], state: AdamState,
              lr: float = 1e-3, betas: tuple[float, float] = (0.9, 0.999),
              eps: float = 1e-8) -> AdamState:
    """Bias-corrected Adam update, applied to ``params`` in place."""
    b1, b2 = betas
    state.step += 1
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v, strict=True):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return state


def tlr_batch(g: Graph, batch, enabled: bool = True) -> Graph:
    """Input graph for one training step: ``g`` without the batch's target links."""
    return remove_edges(g, batch) if enabled else g


def _bce_step(model: LinkModel, g_in: Graph, x, pos: np.ndarray, neg: np.ndarray,
              rng: np.random.Generator | None = None):
    pairs = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    tape = ad.Tape()
    with tape:
        h = model.embed(g_in, x, rng)
        logits = model.logits(g_in, h, pairs[:, 0], pairs[:, 1], rng)
        loss = ad.bce_with_logits(logits, labels)
    return tape, loss


def train_epoch(g: Graph, x, model: LinkModel, cfg: TrainConfig, state: AdamState,
                rng: np.random.Generator, train_edges: np.ndarray | None = None) -> float:
    """One pass over the positive training edges; returns the mean batch loss."""
    edges = g.edge_list()[0] if train_edges is None else np.asarray(train_edges)
    params = model.parameters()
    order = rng.permutation(len(edges))
    losses = []
    for s in range(0, len(edges), cfg.batch_size):
        pos = edges[order[s:s + cfg.batch_size]]
        neg = sample_negatives(g, len(pos) * cfg.neg_ratio, rng)
        g_in = tlr_batch(g, pos, cfg.tlr)
        for p in params:
            p.zero_grad()
        tape, loss = _bce_step(model, g_in, x, pos, neg, rng if model.dropout else None)
        value = loss.item()
        if not np.isfinite(value):
            norms = {name: float(np.abs(t.data).max()) for name, t in model.named_parameters()}
            raise FloatingPointError(f"non-finite loss {value} at step {state.step}; "
                                     f"max |param|: {norms}")
        tape.backward(loss)
        grads = [p.grad for p in params]
        if cfg.weight_decay:
            grads = [gr + cfg.weight_decay * p.data for gr, p in zip(grads, params)]
        adam_step(params, grads, state, cfg.lr, (cfg.beta1, cfg.beta2), cfg.eps)
        losses.append(value)
    return float(np.mean(losses)) if losses else 0.0


def score_links(model: LinkModel, g: Graph, x, pairs) -> np.ndarray:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if not len(pairs):
        return np.zeros(0)
    return model.predict_proba(g, x, pairs)


def evaluate(model: LinkModel, g: Graph, x, pos, neg, metric="hits@100") -> float:
    spec = metric if isinstance(metric, MetricSpec) else MetricSpec.parse(metric)
    return spec(score_links(model, g, x, pos), score_links(model, g, x, neg))


@dataclass
class TrainResult:
    model: LinkModel
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0
    best_valid: float = float("-inf")
    test: float | None = None
    seconds: float = 0.0


def fit(split: EvalSplit, x, cfg: TrainConfig, model: LinkModel | None = None,
        log_path: str | Path | None = None) -> TrainResult:
    """Train on ``split.train`` and keep the parameters with the best validation metric."""
    x = np.asarray(x, dtype=np.float64)
    model = model if model is not None else cfg.build_model(x.shape[1])
    model.meta["train_config"] = asdict(cfg)
    g = split.train_graph()
    metric = MetricSpec.parse(cfg.metric)
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.for_params(model.parameters())
    result = TrainResult(model)
    best = model.snapshot()
    t0 = time.perf_counter()
    depth = model.depth
    for epoch in range(1, cfg.epochs + 1):
        # warm-up epochs train the completion model as plain NCN (depth 0)
        model.depth = 0 if epoch <= cfg.completion_warmup else depth
        loss = train_epoch(g, x, model, cfg, state, rng, split.train)
        model.depth = depth
        row = {"epoch": epoch, "loss": loss, "valid": float("nan")}
        if len(split.valid) and (epoch % cfg.eval_every == 0 or epoch == cfg.epochs):
            row["valid"] = evaluate(model, g, x, split.valid, split.valid_neg, metric)
            if row["valid"] > result.best_valid:
                result.best_valid, result.best_epoch = row["valid"], epoch
                best = model.snapshot()
        logger.info("epoch %d loss %.5f valid %s %.4f", epoch, loss, metric, row["valid"])
        result.history.append(row)
    if not len(split.valid):
        best = model.snapshot()
        result.best_epoch = cfg.epochs
    model.restore(best)
    if len(split.test):
        g_test = split.inference_graph(cfg.use_valid_edges)
        result.test = evaluate(model, g_test, x, split.test, split.test_neg, metric)
    result.seconds = time.perf_counter() - t0
    if log_path is not None:
        write_history(result.history, log_path)
    return result


def write_history(history: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["epoch", "loss", "valid"])
        w.writeheader()
        w.writerows(history)
