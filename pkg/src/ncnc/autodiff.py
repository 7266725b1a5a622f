"""Small reverse-mode autodiff over 2-D float64 arrays.

Operations executed inside a ``with Tape():`` block are recorded on that
tape; outside any tape the same functions just compute forward values, which
is the cheap path used for inference. Only row-vector bias broadcasting is
supported in :func:`add`.
"""

from __future__ import annotations

import contextvars
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

_ACTIVE_TAPE: contextvars.ContextVar["Tape | None"] = contextvars.ContextVar(
    "active_tape", default=None)


class ShapeError(ValueError):
    pass


class Tensor:
    """2-D float64 array with an optional gradient accumulator."""

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        a = np.array(data, dtype=np.float64)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        elif a.ndim == 1:
            a = a.reshape(-1, 1)
        elif a.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got shape {a.shape}")
        self.data = a
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(a) if requires_grad else None
        self.name = name

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def zero_grad(self) -> None:
        if self.requires_grad:
            self.grad = np.zeros_like(self.data)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item() needs a single-element tensor")
        return float(self.data[0, 0])

    def backward(self) -> None:
        tape = _ACTIVE_TAPE.get()
        if tape is None:
            raise RuntimeError("backward() called outside an active Tape")
        tape.backward(self)

    def __repr__(self) -> str:
        flag = ", requires_grad" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


@dataclass
class TapeEntry:
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]


@dataclass
class Tape:
    """Execution-ordered record of differentiable operations."""

    entries: list[TapeEntry] = field(default_factory=list)

    def __enter__(self) -> "Tape":
        self._token = _ACTIVE_TAPE.set(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE_TAPE.reset(self._token)

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every recorded leaf's ``grad``."""
        if loss.shape != (1, 1):
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        produced = {id(e.output) for e in self.entries}
        if id(loss) not in produced:
            if loss.requires_grad:
                loss.grad = loss.grad + 1.0 if loss.grad is not None else np.ones((1, 1))
            return
        grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
        for entry in reversed(self.entries):
            g = grads.pop(id(entry.output), None)
            if g is None:
                continue
            entry.output.grad = g
            for inp, gi in zip(entry.inputs, entry.backward(g)):
                if gi is None or not inp.requires_grad:
                    continue
                key = id(inp)
                if key in produced:
                    grads[key] = grads[key] + gi if key in grads else gi
                elif inp.grad is None:
                    inp.grad = np.array(gi, dtype=np.float64)
                else:
                    inp.grad += gi


def _record(op: str, inputs: tuple[Tensor, ...], out_data: np.ndarray,
            backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]) -> Tensor:
    tape = _ACTIVE_TAPE.get()
    needs = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = out_data
    out.requires_grad = needs
    out.grad = None
    out.name = None
    if needs:
        tape.entries.append(TapeEntry(op, inputs, out, backward))
    return out


# linear algebra ------------------------------------------------------------

def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes {a.shape} and {b.shape} do not conform")
    ad, bd = a.data, b.data
    return _record("matmul", (a, b), ad @ bd,
                   lambda g: (g @ bd.T, ad.T @ g))


def spmm(p: sp.spmatrix, x) -> Tensor:
    """Constant sparse matrix times dense tensor."""
    x = as_tensor(x)
    if p.shape[1] != x.shape[0]:
        raise ShapeError(f"spmm shapes {p.shape} and {x.shape} do not conform")
    p = sp.csr_matrix(p)
    return _record("spmm", (x,), np.asarray(p @ x.data),
                   lambda g: (np.asarray(p.T @ g),))


def weighted_spmm(rows: np.ndarray, cols: np.ndarray, values, x, n_rows: int) -> Tensor:
    """``out[r] = sum_k values[k] * x[cols[k]]`` over entries with ``rows[k] == r``.

    Differentiable in both ``values`` (a k x 1 column) and ``x``; this is a
    sparse matrix product whose non-zeros are themselves model outputs.
    """
    values, x = as_tensor(values), as_tensor(x)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if values.shape != (len(rows), 1) or len(cols) != len(rows):
        raise ShapeError("values must be a column with one entry per (row, col)")
    p = sp.csr_matrix((values.data[:, 0], (rows, cols)), shape=(n_rows, x.shape[0]))
    xd = x.data

    def back(g):
        gv = np.einsum("kf,kf->k", g[rows], xd[cols]).reshape(-1, 1)
        return gv, np.asarray(p.T @ g)

    return _record("weighted_spmm", (values, x), np.asarray(p @ xd), back)


def gather_rows(x, index) -> Tensor:
    x = as_tensor(x)
    index = np.asarray(index, dtype=np.int64)
    n = x.shape[0]

    def back(g):
        out = np.zeros((n, g.shape[1]))
        np.add.at(out, index, g)
        return (out,)

    return _record("gather_rows", (x,), x.data[index], back)


# elementwise ---------------------------------------------------------------

def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape == b.shape:
        return _record("add", (a, b), a.data + b.data, lambda g: (g, g))
    if b.shape == (1, a.shape[1]):
        return _record("add_row", (a, b), a.data + b.data,
                       lambda g: (g, g.sum(axis=0, keepdims=True)))
    raise ShapeError(f"add shapes {a.shape} and {b.shape} do not conform")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"sub shapes {a.shape} and {b.shape} differ")
    return _record("sub", (a, b), a.data - b.data, lambda g: (g, -g))


def hadamard(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"hadamard shapes {a.shape} and {b.shape} differ")
    ad, bd = a.data, b.data
    return _record("hadamard", (a, b), ad * bd, lambda g: (g * bd, g * ad))


def scale(a, c: float) -> Tensor:
    a = as_tensor(a)
    return _record("scale", (a,), a.data * c, lambda g: (g * c,))


def concat_cols(*parts) -> Tensor:
    parts = tuple(as_tensor(p) for p in parts)
    if len({p.shape[0] for p in parts}) != 1:
        raise ShapeError("concat_cols needs equal row counts")
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])
    return _record("concat_cols", parts, np.concatenate([p.data for p in parts], axis=1),
                   lambda g: tuple(g[:, bounds[k]:bounds[k + 1]] for k in range(len(parts))))


def row_sum(a) -> Tensor:
    a = as_tensor(a)
    cols = a.shape[1]
    return _record("row_sum", (a,), a.data.sum(axis=1, keepdims=True),
                   lambda g: (np.repeat(g, cols, axis=1),))


def total(a) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    return _record("sum", (a,), a.data.sum().reshape(1, 1),
                   lambda g: (np.full(shape, g[0, 0]),))


def mean(a) -> Tensor:
    a = as_tensor(a)
    shape = a.shape
    k = a.data.size
    return _record("mean", (a,), (a.data.sum() / k).reshape(1, 1),
                   lambda g: (np.full(shape, g[0, 0] / k),))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    s = _sigmoid(a.data)
    return _record("sigmoid", (a,), s, lambda g: (g * s * (1.0 - s),))


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return _record("relu", (a,), np.where(mask, a.data, 0.0), lambda g: (g * mask,))


def identity(a) -> Tensor:
    return as_tensor(a)


def layer_norm(a, eps: float = 1e-5) -> Tensor:
    """Normalize each row to zero mean and unit variance (no affine part)."""
    a = as_tensor(a)
    x = a.data
    mu = x.mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(x.var(axis=1, keepdims=True) + eps)
    y = (x - mu) * inv

    def back(g):
        gm = g.mean(axis=1, keepdims=True)
        gy = (g * y).mean(axis=1, keepdims=True)
        return (inv * (g - gm - y * gy),)

    return _record("layer_norm", (a,), y, back)


def bce_with_logits(logits, labels) -> Tensor:
    """Mean binary cross-entropy computed stably from logits."""
    z = as_tensor(logits)
    y = np.asarray(labels, dtype=np.float64).reshape(z.shape)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 or 1")
    zd = z.data
    k = zd.size
    loss = np.maximum(zd, 0) - zd * y + np.log1p(np.exp(-np.abs(zd)))
    return _record("bce_with_logits", (z,), (loss.sum() / k).reshape(1, 1),
                   lambda g: ((_sigmoid(zd) - y) * (g[0, 0] / k),))


def dropout(a, p: float, rng: np.random.Generator | None) -> Tensor:
    """Inverted dropout; identity when ``rng`` is None or ``p`` is 0."""
    a = as_tensor(a)
    if rng is None or p <= 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout probability must be in [0, 1)")
    mask = (rng.random(a.shape) >= p) / (1.0 - p)
    return _record("dropout", (a,), a.data * mask, lambda g: (g * mask,))


def detach(a) -> Tensor:
    return Tensor(as_tensor(a).data)
