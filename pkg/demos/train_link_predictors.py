"""
Training GAE, NCN and NCNC on a citation-style graph
====================================================

A seeded synthetic graph with Cora's size and average degree stands in for
the real dataset. All three models share one training setup: Adam, BCE over
one sampled negative per positive, target-edge removal per minibatch and
best-validation selection. The CN heuristic needs no training.

The full 100-epoch comparison over five seeds is part of the acceptance
suite; this demo runs a shorter schedule on one seed (under a minute).
"""

from ncnc import TrainConfig, fit, hits_at_k, random_split
from ncnc.pairwise import heuristic_scores
from ncnc.synthetic import cora_like

sg = cora_like(seed=0)
split = random_split(sg.edges, (0.7, 0.1, 0.2), seed=0, n=sg.n)
print(f"{sg.n} nodes, {len(sg.edges)} edges, {sg.features.shape[1]} features")
print(f"train/valid/test = {len(split.train)}/{len(split.valid)}/{len(split.test)}")

# %%
# CN on the training graph.

g = split.train_graph()
cn = hits_at_k(heuristic_scores(g, split.test, "CN"), heuristic_scores(g, split.test_neg, "CN"), 100)
print(f"CN    test Hits@100 {cn:.4f}")

# %%
# The learned scorers. ``completion_offset`` only affects NCNC; it shifts the
# inner completion logits toward the true, much lower edge density.

for variant in ("gae", "ncn", "ncnc"):
    cfg = TrainConfig(variant=variant, epochs=30, completion_offset=3.0, seed=0)
    res = fit(split, sg.features, cfg)
    print(f"{variant:5s} test Hits@100 {res.test:.4f} (best epoch {res.best_epoch}, "
          f"{res.seconds:.0f}s)")
