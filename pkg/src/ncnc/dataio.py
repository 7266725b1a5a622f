"""Edge-list and feature ingestion, and the binary checkpoint format.

Checkpoint layout (all integers little-endian):

    bytes 0-3    magic b"NCNC"
    bytes 4-7    u32 format version (currently 1)
    bytes 8-11   u32 length L of the JSON header
    next L       UTF-8 JSON header: {"params": [{"name", "shape"}...],
                 "variant", "depth", "config", ...}
    remainder    float64 little-endian weights, parameters in header order,
                 each flattened row-major
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .mpnn import MpnnParams
from .predictors import LinkModel, PredictorParams

MAGIC = b"NCNC"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


class ParseError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


class EdgeList(NamedTuple):
    pairs: np.ndarray
    weights: np.ndarray | None
    id_map: dict[str, int]

    @property
    def n(self) -> int:
        return len(self.id_map)


def load_edge_list(path: str | Path) -> EdgeList:
    """Parse whitespace-separated ``u v [w]`` lines; ``#`` starts a comment.

    If every id is a non-negative integer, ids map to themselves and n is the
    largest id plus one. Otherwise ids are numbered in order of first
    appearance. Weights are returned only when every line carries one.
    """
    rows, weights = [], []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.split()
            if len(tok) not in (2, 3):
                raise ParseError(f"{path}:{lineno}: expected 'u v [w]', got {raw.strip()!r}")
            if len(tok) == 3:
                try:
                    weights.append(float(tok[2]))
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad weight {tok[2]!r}") from None
            rows.append((tok[0], tok[1], lineno))
    if weights and len(weights) != len(rows):
        raise ParseError(f"{path}: weights given on some lines only")

    ids = [t for u, v, _ in rows for t in (u, v)]
    if all(t.isdigit() for t in ids):
        n = max((int(t) for t in ids), default=-1) + 1
        id_map = {str(k): k for k in range(n)}
        pairs = np.array([(int(u), int(v)) for u, v, _ in rows], dtype=np.int64)
    else:
        id_map = {}
        for t in ids:
            id_map.setdefault(t, len(id_map))
        pairs = np.array([(id_map[u], id_map[v]) for u, v, _ in rows], dtype=np.int64)
    pairs = pairs.reshape(-1, 2)
    w = np.array(weights, dtype=np.float64) if weights else None
    return EdgeList(pairs, w, id_map)


def save_edge_list(path: str | Path, pairs, weights=None) -> None:
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    with open(path, "w") as fh:
        for t, (u, v) in enumerate(pairs):
            fh.write(f"{u} {v}\n" if weights is None else f"{u} {v} {weights[t]!r}\n")


def load_features(path: str | Path | None, n: int, fallback: str | None = None) -> np.ndarray:
    """Read an n×F float CSV, one row per node in id order.

    A missing file (or ``path=None``) is an error unless ``fallback`` is
    ``"constant"`` (all-ones n×1) or ``"one_hot"`` (identity n×n).
    """
    if path is None or not Path(path).exists():
        if fallback == "constant":
            return np.ones((n, 1))
        if fallback == "one_hot":
            return np.eye(n)
        raise FileNotFoundError(f"feature file {path} not found and no fallback given")
    rows = []
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), 1):
            if not rec or not "".join(rec).strip():
                continue
            if rows and len(rec) != len(rows[0]):
                raise ParseError(f"{path}: row {lineno} has {len(rec)} columns, "
                                 f"expected {len(rows[0])}")
            try:
                rows.append([float(x) for x in rec])
            except ValueError:
                raise ParseError(f"{path}: row {lineno} has a non-numeric entry") from None
    x = np.array(rows, dtype=np.float64)
    if x.shape[0] != n:
        raise ValueError(f"feature file has {x.shape[0]} rows but the graph has {n} nodes")
    return x


def save_checkpoint(path: str | Path, params: list[tuple[str, np.ndarray]],
                    **header) -> None:
    """Write named float64 arrays plus JSON-serializable ``header`` fields."""
    meta = dict(header)
    meta["params"] = [{"name": name, "shape": list(np.shape(a))} for name, a in params]
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)))
        fh.write(blob)
        for _, a in params:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[list[tuple[str, np.ndarray]], dict]:
    """Inverse of :func:`save_checkpoint`: ``(params, header)``."""
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise CheckpointError(f"{path}: truncated checkpoint prefix")
    magic, version, hlen = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}, not a checkpoint")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version} "
                              f"(this build reads {FORMAT_VERSION})")
    end = _PREFIX.size + hlen
    if len(data) < end:
        raise CheckpointError(f"{path}: truncated header")
    try:
        meta = json.loads(data[_PREFIX.size:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt header ({e})") from None
    params, off = [], end
    for spec in meta["params"]:
        shape = tuple(spec["shape"])
        size = 8 * int(np.prod(shape, dtype=np.int64))
        if len(data) < off + size:
            raise CheckpointError(f"{path}: truncated payload at {spec['name']}")
        a = np.frombuffer(data, dtype="<f8", count=size // 8, offset=off)
        params.append((spec["name"], a.reshape(shape).astype(np.float64)))
        off += size
    if off != len(data):
        raise CheckpointError(f"{path}: {len(data) - off} trailing bytes after payload")
    return params, meta


def save_model(path: str | Path, model: LinkModel, **extra) -> None:
    """Checkpoint a :class:`LinkModel` with its architecture."""
    params = [(name, t.data) for name, t in model.named_parameters()]
    m = model.mpnn
    save_checkpoint(path, params, variant=model.variant, depth=model.depth,
                    detach_completion=model.detach_completion, dropout=model.dropout,
                    completion_offset=model.completion_offset,
                    activation=m.activation, propagation=m.propagation,
                    last_activation=m.last_activation,
                    mlp_norm=bool(model.predictor is not None and model.predictor.norm),
                    config=model.meta.get("train_config", {}), **extra)


def load_model(path: str | Path) -> tuple[LinkModel, dict]:
    """Rebuild the LinkModel stored by :func:`save_model`; returns ``(model, header)``."""
    params, meta = load_checkpoint(path)
    arrays = dict(params)

    def stack(prefix):
        ws, bs, k = [], [], 0
        while f"{prefix}.W{k}" in arrays:
            ws.append(ad.Tensor(arrays[f"{prefix}.W{k}"].copy(), requires_grad=True))
            bs.append(ad.Tensor(arrays[f"{prefix}.b{k}"].copy(), requires_grad=True))
            k += 1
        return ws, bs

    try:
        mw, mb = stack("mpnn")
        mpnn = MpnnParams(mw, mb, meta["activation"], meta["propagation"],
                          meta["last_activation"])
        pw, pb = stack("mlp")
        predictor = PredictorParams(pw, pb, meta.get("mlp_norm", False)) if pw else None
        model = LinkModel(mpnn, predictor, meta["variant"], meta["depth"],
                          meta["detach_completion"], meta.get("dropout", 0.0),
                          meta.get("completion_offset", 0.0))
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"{path}: checkpoint does not describe a link model ({e})") from None
    model.meta["train_config"] = meta.get("config", {})
    return model, meta
