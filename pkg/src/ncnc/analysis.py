"""Common-neighbor statistics under incomplete and complete input graphs.

The incomplete graph holds the training edges only; the complete graph adds
the validation and test edges. Comparing CN counts and CN ranking quality
between the two shows how much neighbor information the split hides.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph
from .metrics import EvalSplit, MetricSpec
from .pairwise import cn_counts

POPULATIONS = ("train-incomplete", "test-incomplete", "train-complete", "test-complete")


@dataclass
class CnHistogram:
    """Integer CN-count buckets; ``frequencies[t]`` links have ``buckets[t]`` CNs."""

    buckets: np.ndarray
    frequencies: np.ndarray
    label: str = ""

    @property
    def total(self) -> int:
        return int(self.frequencies.sum())

    def as_dict(self) -> dict[int, int]:
        return {int(b): int(f) for b, f in zip(self.buckets, self.frequencies)}

    def to_csv(self, path: str | Path) -> None:
        total = max(self.total, 1)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cn_count", "frequency", "fraction"])
            for b, f in zip(self.buckets, self.frequencies):
                w.writerow([int(b), int(f), f / total])


def cn_distribution(g: Graph, links, label: str = "") -> CnHistogram:
    """Histogram of |N(i) ∩ N(j)| over ``links`` in graph ``g``."""
    counts = cn_counts(g, links)
    buckets, freq = np.unique(counts, return_counts=True)
    return CnHistogram(buckets.astype(np.int64), freq.astype(np.int64), label)


@dataclass
class DegradationRow:
    population: str
    links: int
    hits: float
    mean_cn: float


def degradation_report(split: EvalSplit, metric: str = "hits@100"):
    """CN Hits@K of train and test edges, ranked against the test negatives.

    Returns ``(rows, histograms)``: one row and one histogram per population in
    ``POPULATIONS``. An empty link set yields a row with NaN entries.
    CN never looks at the target edge itself, so no edge removal is needed.
    """
    spec = MetricSpec.parse(metric) if isinstance(metric, str) else metric
    graphs = {"incomplete": split.train_graph(), "complete": split.full_graph()}
    links = {"train": split.train, "test": split.test}
    rows, hists = [], {}
    for pop in POPULATIONS:
        part, kind = pop.split("-")
        g = graphs[kind]
        pos = links[part]
        hists[pop] = cn_distribution(g, pos, pop)
        if not len(pos) or not len(split.test_neg):
            rows.append(DegradationRow(pop, len(pos), float("nan"), float("nan")))
            continue
        c = cn_counts(g, pos).astype(np.float64)
        neg = cn_counts(g, split.test_neg).astype(np.float64)
        rows.append(DegradationRow(pop, len(pos), spec(c, neg), float(c.mean())))
    return rows, hists


def write_report(rows: list[DegradationRow], hists: dict[str, CnHistogram],
                 out_dir: str | Path, metric: str = "hits@100") -> list[Path]:
    """Summary table ``degradation.csv`` plus ``cn_hist_<population>.csv`` files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "degradation.csv"]
    with open(paths[0], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["population", "links", metric, "mean_cn"])
        for r in rows:
            w.writerow([r.population, r.links, r.hits, r.mean_cn])
    for pop, h in hists.items():
        p = out / f"cn_hist_{pop}.csv"
        h.to_csv(p)
        paths.append(p)
    return paths
