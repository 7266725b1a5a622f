"""
Checking the tape against finite differences
============================================

The autodiff engine records each op on a tape and replays it backwards.
Here one full training step is compared against central differences:
GCN encoder, NCNC-1 scorer and BCE loss, with the target edges removed
from the input graph.
"""

import numpy as np

from ncnc import Graph, init_link_model
from ncnc import autodiff as ad
from ncnc.pipeline import sample_negatives, tlr_batch

rng = np.random.default_rng(0)
n = 16
upper = np.triu(rng.random((n, n)) < 0.3, k=1)
g = Graph.from_edge_list(np.argwhere(upper), n)
x = rng.normal(size=(n, 3))

pos = g.edge_list()[0][:5]
neg = sample_negatives(g, 5, rng)
g_in = tlr_batch(g, pos)
pairs = np.concatenate([pos, neg])
labels = np.r_[np.ones(5), np.zeros(5)]

model = init_link_model(3, "ncnc", depth=1, hidden=4, mlp_hidden=4, seed=0)
for name, t in model.named_parameters():
    if ".b" in name:
        t.data += rng.normal(scale=0.1, size=t.shape)  # stay off the relu kink


def loss():
    h = model.embed(g_in, x)
    return ad.bce_with_logits(model.logits(g_in, h, pairs[:, 0], pairs[:, 1]), labels)


tape = ad.Tape()
with tape:
    value = loss()
tape.backward(value)
print(f"loss {value.item():.6f}")

# %%
# Central differences, one coordinate at a time.

eps = 1e-6
for name, p in model.named_parameters():
    num = np.zeros_like(p.data)
    flat, out = p.data.reshape(-1), num.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + eps
        up = loss().item()
        flat[k] = old - eps
        down = loss().item()
        flat[k] = old
        out[k] = (up - down) / (2 * eps)
    scale = max(np.abs(p.grad).max(), np.abs(num).max(), 1e-8)
    print(f"{name:8s} rel err {np.abs(p.grad - num).max() / scale:.2e}")
