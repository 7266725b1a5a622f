"""
How much neighbor information a split hides
===========================================

Held-out edges are missing from the training graph, so a link sees fewer
common neighbors than it would in the complete graph. With a uniform random
split the loss hits training and test links about equally; the CN heuristic
roughly halves its Hits@100. Common-neighbor completion tries to recover
these missing neighbors from the model's own link predictions.
"""

import numpy as np

from ncnc import random_split
from ncnc.analysis import degradation_report
from ncnc.pairwise import cn_counts
from ncnc.synthetic import cora_like

sg = cora_like(seed=0)
split = random_split(sg.edges, (0.7, 0.1, 0.2), seed=0, n=sg.n)
rows, hists = degradation_report(split, "hits@100")

for r in rows:
    zero = hists[r.population].as_dict().get(0, 0) / max(hists[r.population].total, 1)
    print(f"{r.population:17s} links {r.links:5d}  CN Hits@100 {r.hits:.3f}  "
          f"mean CN {r.mean_cn:.2f}  share with no CN {zero:.2f}")

# %%
# The histograms themselves, for the test links.

for pop in ("test-incomplete", "test-complete"):
    h = hists[pop]
    top = ", ".join(f"{b}:{f}" for b, f in zip(h.buckets[:6], h.frequencies[:6]))
    print(f"{pop}: {top}")

# %%
# The incomplete counts never exceed the complete ones.

inc, com = split.train_graph(), split.full_graph()
print("coordinate-wise <=:", bool(np.all(cn_counts(inc, split.test) <= cn_counts(com, split.test))))
