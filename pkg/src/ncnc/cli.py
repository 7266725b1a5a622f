"""Command-line entry point: ``ncnc <subcommand> ...``.

Subcommands: split, heuristic, train, eval, analyze, bench. Every output is
a CSV with a header row. Set ``LINKPRED_LOG`` to a logging level name
(DEBUG, INFO, ...) to change verbosity; the default is WARNING.

A split directory holds ``train.txt``, ``valid.txt``, ``test.txt``,
``valid_neg.txt`` and ``test_neg.txt`` (one ``u v`` pair per line) plus
``split.json`` recording the node count, ratios and seed.

The ``train`` config is an INI file::

    [data]
    split = splits/cora            # relative paths resolve against the file
    features = cora_features.csv   # optional
    feature_fallback = constant    # constant | one_hot, used without features

    [model]
    variant = ncnc                 # gae | ncn | ncn_diff | ncn2 | ncnc
    depth = 1
    hidden = 64
    layers = 2
    mlp_hidden = 64
    mlp_layers = 2
    propagation = sym_norm
    dropout = 0.0
    completion_offset = 3.0        # ncnc only: inner logit shift

    [train]
    epochs = 100
    batch_size = 512
    lr = 0.001
    seed = 0
    tlr = true
    metric = hits@100

    [output]
    checkpoint = ncnc.ckpt
    log = ncnc_epochs.csv

Any :class:`~ncnc.pipeline.TrainConfig` field may appear in [model] or [train].
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench, dataio
from .graph import Graph
from .metrics import EvalSplit, MetricSpec, random_split
from .pairwise import (BuddyConfig, NeoGnnConfig, buddy_features, heuristic_scores,
                       neo_gnn_feature)
from .pipeline import TrainConfig, evaluate, fit

logger = logging.getLogger("ncnc")

SPLIT_FILES = ("train", "valid", "test", "valid_neg", "test_neg")


class UsageError(Exception):
    """Bad input from the operator: missing files, malformed values."""


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _existing(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {p}")
    return p


# split directories ----------------------------------------------------------

def write_split(split: EvalSplit, out_dir: str | Path, **meta) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in SPLIT_FILES:
        dataio.save_edge_list(out / f"{name}.txt", getattr(split, name))
    info = {"n": split.n, "metric": str(split.metric), **meta}
    (out / "split.json").write_text(json.dumps(info, indent=2) + "\n")


def read_split(split_dir: str | Path) -> EvalSplit:
    d = _existing(split_dir, "split directory")
    info = json.loads(_existing(d / "split.json", "split metadata").read_text())
    parts = {}
    for name in SPLIT_FILES:
        p = _existing(d / f"{name}.txt", "split file")
        parts[name] = dataio.load_edge_list(p).pairs
    return EvalSplit(int(info["n"]), metric=MetricSpec.parse(info.get("metric", "hits@100")),
                     **parts)


def _features(path, n: int, fallback: str | None) -> np.ndarray:
    if path is not None and fallback is None:
        _existing(path, "feature file")
    return dataio.load_features(path, n, fallback or "constant")


# subcommands ----------------------------------------------------------------

def cmd_split(args) -> int:
    el = dataio.load_edge_list(_existing(args.edges, "edge file"))
    split = random_split(el.pairs, args.ratios, args.seed, n=el.n, metric=args.metric)
    write_split(split, args.out, ratios=list(args.ratios), seed=args.seed)
    print(f"train {len(split.train)}  valid {len(split.valid)}  test {len(split.test)}")
    return 0


def cmd_heuristic(args) -> int:
    el = dataio.load_edge_list(_existing(args.graph, "graph file"))
    links = dataio.load_edge_list(_existing(args.links, "link file")).pairs
    n = max(el.n, int(links.max()) + 1 if len(links) else 0)
    g = Graph.from_edge_list(el.pairs, n, el.weights)
    method = args.method.lower()
    if method in ("cn", "ra", "aa"):
        cols, vals = [method], heuristic_scores(g, links, method)[:, None]
    elif method == "neo":
        cfg = NeoGnnConfig(l=args.l, beta=args.beta)
        cols = ["neo"]
        vals = np.array([[neo_gnn_feature(g, int(u), int(v), cfg)] for u, v in links])
    else:
        cfg = BuddyConfig(k=args.k)
        k = cfg.k
        cols = ([f"a_{x + 1}{y + 1}" for x in range(k) for y in range(k)]
                + [f"b_ij_{x + 1}" for x in range(k)] + [f"b_ji_{x + 1}" for x in range(k)])
        vals = np.array([buddy_features(g, int(u), int(v), cfg) for u, v in links])
    vals = vals.reshape(len(links), len(cols))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["i", "j", *cols])
        for (u, v), row in zip(links, vals):
            w.writerow([int(u), int(v), *[_fmt(x) for x in row]])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _fmt(x: float):
    return int(x) if float(x).is_integer() else repr(float(x))


_SECTION_KEYS = {"data": {"split", "features", "feature_fallback"},
                 "output": {"checkpoint", "log"}}


def load_train_config(path: str | Path) -> tuple[TrainConfig, dict]:
    """Parse a train INI file into a TrainConfig plus resolved data/output paths."""
    p = _existing(path, "config file")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read(p)
    fields = {f.name: f for f in dataclasses.fields(TrainConfig)}
    kwargs, io = {}, {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            if section in _SECTION_KEYS:
                if key not in _SECTION_KEYS[section]:
                    raise UsageError(f"{p}: unknown key {key!r} in [{section}]")
                io[key] = raw
                continue
            if key not in fields:
                raise UsageError(f"{p}: unknown key {key!r} in [{section}]")
            kind = type(fields[key].default)
            try:
                if kind is bool:
                    kwargs[key] = cp.getboolean(section, key)
                else:
                    kwargs[key] = kind(raw)
            except ValueError:
                raise UsageError(f"{p}: bad value {raw!r} for {key}") from None
    if "split" not in io:
        raise UsageError(f"{p}: [data] split is required")
    base = p.parent
    for key in ("split", "features", "checkpoint", "log"):
        if key in io:
            io[key] = base / io[key]
    try:
        cfg = TrainConfig(**kwargs)
    except ValueError as e:
        raise UsageError(f"{p}: {e}") from None
    return cfg, io


def cmd_train(args) -> int:
    cfg, io = load_train_config(args.config)
    split = read_split(io["split"])
    x = _features(io.get("features"), split.n, io.get("feature_fallback"))
    ckpt = Path(io.get("checkpoint", Path(args.config).with_suffix(".ckpt")))
    log = Path(io.get("log", ckpt.with_suffix(".csv")))
    result = fit(split, x, cfg, log_path=log)
    dataio.save_model(ckpt, result.model, best_epoch=result.best_epoch,
                      best_valid=result.best_valid, in_dim=int(x.shape[1]))
    print(f"best epoch {result.best_epoch}  valid {cfg.metric} {result.best_valid:.4f}  "
          f"test {result.test if result.test is None else round(result.test, 4)}")
    return 0


def cmd_eval(args) -> int:
    model, meta = dataio.load_model(_existing(args.checkpoint, "checkpoint"))
    split = read_split(args.split)
    x = _features(args.features, split.n, args.feature_fallback)
    if x.shape[1] != meta.get("in_dim", x.shape[1]):
        raise UsageError(f"features have {x.shape[1]} columns, model expects {meta['in_dim']}")
    metric = args.metric or str(split.metric)
    use_valid = bool(meta.get("config", {}).get("use_valid_edges", False))
    if args.subset == "valid":
        g, pos, neg = split.train_graph(), split.valid, split.valid_neg
    else:
        g, pos, neg = split.inference_graph(use_valid), split.test, split.test_neg
    value = evaluate(model, g, x, pos, neg, metric)
    print(f"{metric} {value:.6f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dataset", "variant", "metric", "value", "seed"])
            w.writerow([Path(args.split).name, model.variant, metric, repr(value),
                        meta.get("config", {}).get("seed", "")])
    return 0


def cmd_analyze(args) -> int:
    split = read_split(args.split)
    rows, hists = analysis.degradation_report(split, args.metric)
    analysis.write_report(rows, hists, args.out, args.metric)
    for r in rows:
        print(f"{r.population:17s} links {r.links:6d}  {args.metric} {r.hits:.4f}  "
              f"mean CN {r.mean_cn:.3f}")
    return 0


def cmd_bench(args) -> int:
    rows = bench.run_bench(args.degrees, args.repeats, n=args.nodes, links=args.links,
                           completion_links=args.completion_links, dim=args.dim,
                           seed=args.seed)
    bench.write_bench(rows, args.out)
    for f in bench.fit_slopes(rows):
        print(f"{f.variant}: log-log slope {f.slope:.3f} (R^2 {f.r2:.3f})")
    for d, r in bench.time_ratios(rows).items():
        print(f"d={d}: ncnc/ncn time ratio {r:.2f}")
    return 0


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncnc", description="Link prediction with neural "
                                 "common neighbors and common-neighbor completion.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="random train/valid/test split with negatives")
    p.add_argument("--edges", required=True)
    p.add_argument("--ratios", type=_floats, default=(0.7, 0.1, 0.2))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metric", default="hits@100")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("heuristic", help="per-link heuristic scores or features")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", required=True, choices=["cn", "ra", "aa", "neo", "buddy"])
    p.add_argument("--links", required=True)
    p.add_argument("--l", type=int, default=2, help="neo: maximum walk length")
    p.add_argument("--beta", type=float, default=0.5, help="neo: decay per extra hop")
    p.add_argument("--k", type=int, default=2, help="buddy: number of hops")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_heuristic)

    p = sub.add_parser("train", help="train a model from an INI config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a split with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--metric", help="hits@K or mrr (default: the split's metric)")
    p.add_argument("--subset", choices=["test", "valid"], default="test")
    p.add_argument("--features")
    p.add_argument("--feature-fallback", choices=["constant", "one_hot"])
    p.add_argument("--threads", type=int, default=1, help="accepted; scoring is single-threaded")
    p.add_argument("--out", help="metric CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("analyze", help="CN distributions, complete vs incomplete graph")
    p.add_argument("--split", required=True)
    p.add_argument("--metric", default="hits@100")
    p.add_argument("--threads", type=int, default=1, help="accepted; analysis is single-threaded")
    p.add_argument("--out", default="analysis")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="per-link scoring time against node degree")
    p.add_argument("--degrees", type=_ints, default=bench.DEGREES)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--nodes", type=int, default=4096)
    p.add_argument("--links", type=int, default=1024)
    p.add_argument("--completion-links", type=int, default=128,
                   help="links timed for ncnc, whose per-link cost grows as d^2")
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("LINKPRED_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, FileNotFoundError) as e:
        print(f"ncnc {args.command}: error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"ncnc {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
