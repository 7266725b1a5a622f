"""Per-link scoring cost of NCN and NCNC-1 as a function of node degree.

Graphs are d-regular ring lattices, so the maximum degree is exactly d. The
MPNN output H is drawn once per graph and held fixed, which isolates the
per-link term C of the O(B + C t) decomposition from the shared MPNN cost B.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import autodiff as ad
from .graph import Graph
from .predictors import init_predictor, ncn_logits, ncnc_logits
from .synthetic import circulant

DEGREES = (64, 128, 256, 512, 1024)


@dataclass
class BenchRow:
    variant: str
    degree: int
    seconds_per_link: float


@dataclass
class SlopeFit:
    variant: str
    slope: float
    r2: float


def bench_links(n: int, d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Pairs (u, u + s) with ring offset s uniform in [1, d].

    Both the common-neighbor count (about d - s) and the one-sided
    neighborhoods (about 2s) then grow in proportion to d.
    """
    u = rng.integers(0, n, size=count)
    s = rng.integers(1, d + 1, size=count)
    return np.stack([u, (u + s) % n], axis=1)


def _time(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_bench(degrees=DEGREES, repeats: int = 3, *, n: int = 4096, links: int = 1024,
              completion_links: int = 128, dim: int = 8, seed: int = 0,
              variants=("ncn", "ncnc")) -> list[BenchRow]:
    """Best-of-``repeats`` wall time per link for each variant and degree.

    NCNC-1 scores about d inner links per target, so it is timed on the first
    ``completion_links`` links only. Below d of roughly 64 the per-call numpy
    overhead, not the neighborhood work, dominates the per-link time.
    """
    rng = np.random.default_rng(seed)
    h = ad.Tensor(rng.normal(size=(n, dim)))
    params = init_predictor(2 * dim, [dim], rng)
    rows = []
    for d in degrees:
        if d >= n:
            raise ValueError(f"degree {d} needs more than {n} nodes")
        g = Graph.from_edge_list(circulant(n, d), n)
        pairs = bench_links(n, d, links, rng)
        i, j = pairs[:, 0], pairs[:, 1]
        g.pattern  # build cached CSR views outside the timed region
        c = min(completion_links, links)
        runs = {"ncn": (lambda: ncn_logits(g, h, i, j, params), links),
                "ncnc": (lambda: ncnc_logits(g, h, i[:c], j[:c], params, 1), c)}
        for v in variants:
            fn, count = runs[v]
            rows.append(BenchRow(v, int(d), _time(fn, repeats) / count))
    return rows


def fit_slopes(rows: list[BenchRow]) -> list[SlopeFit]:
    """Least-squares slope of log(time) against log(d), per variant."""
    out = []
    for v in dict.fromkeys(r.variant for r in rows):
        sub = [r for r in rows if r.variant == v]
        if len(sub) < 2:
            continue
        fit = stats.linregress(np.log([r.degree for r in sub]),
                               np.log([r.seconds_per_link for r in sub]))
        out.append(SlopeFit(v, float(fit.slope), float(fit.rvalue ** 2)))
    return out


def time_ratios(rows: list[BenchRow], num: str = "ncnc", den: str = "ncn") -> dict[int, float]:
    a = {r.degree: r.seconds_per_link for r in rows if r.variant == num}
    b = {r.degree: r.seconds_per_link for r in rows if r.variant == den}
    return {d: a[d] / b[d] for d in sorted(a) if d in b}


def write_bench(rows: list[BenchRow], path: str | Path) -> None:
    """CSV: variant, degree, seconds_per_link, then a slope row per variant."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["variant", "degree", "seconds_per_link", "loglog_slope", "r2"])
        for r in rows:
            w.writerow([r.variant, r.degree, f"{r.seconds_per_link:.6e}", "", ""])
        for f in fit_slopes(rows):
            w.writerow([f.variant, "fit", "", f"{f.slope:.4f}", f"{f.r2:.4f}"])
