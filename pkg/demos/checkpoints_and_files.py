"""
Edge lists, features and checkpoints on disk
============================================

Edge lists are plain ``u v [w]`` text. Features are a headerless CSV with one
row per node. A trained model is stored as a small binary checkpoint: a
magic string, a version, a JSON header with the architecture, then the raw
float64 weights.
"""

import tempfile
from pathlib import Path

import numpy as np

from ncnc import Graph, init_link_model
from ncnc.dataio import load_edge_list, load_features, load_model, save_model

tmp = Path(tempfile.mkdtemp())
(tmp / "edges.txt").write_text("# a tiny graph with named nodes\nalice bob\nbob carol\ncarol alice\ncarol dave\n")
np.savetxt(tmp / "x.csv", np.eye(4), delimiter=",")

el = load_edge_list(tmp / "edges.txt")
print("ids:", el.id_map)
g = Graph.from_edge_list(el.pairs, el.n)
x = load_features(tmp / "x.csv", el.n)

# %%
# Save an (untrained) NCNC model and read it back; scores match bitwise.

model = init_link_model(4, "ncnc", depth=1, hidden=8, mlp_hidden=8, seed=3)
save_model(tmp / "model.ckpt", model, note="demo")
again, header = load_model(tmp / "model.ckpt")
pairs = np.array([[0, 3], [1, 3]])
print("header:", {k: header[k] for k in ("variant", "depth", "note")})
print("same scores:", np.array_equal(model.predict_proba(g, x, pairs), again.predict_proba(g, x, pairs)))
print("checkpoint bytes:", (tmp / "model.ckpt").stat().st_size)
