import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ncnc import Graph, init_link_model
from ncnc import autodiff as ad
from ncnc.predictors import (LinkModel, completion_probs, gae_score, init_predictor,
                             ncn_feature, ncn_logits, ncn_score, ncn_variant_feature,
                             ncnc_logits, ncnc_score)
from ncnc.synthetic import cycle

from conftest import G1_EDGES, random_graph
from fd import check


def mlp_np(params, z):
    """Straight-line MLP: ReLU hidden layers, linear output."""
    h = z
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.data + b.data
        if k < len(params.weights) - 1:
            h = np.maximum(h, 0)
    return h[:, 0]


def sig(x):
    return 1 / (1 + np.exp(-x))


def ncn_ref(adj, h, i, j, params, offset=0.0):
    cn = sorted(set(adj[i]) & set(adj[j]))
    pooled = h[cn].sum(axis=0) if cn else np.zeros(h.shape[1])
    z = np.concatenate([h[i] * h[j], pooled])[None]
    return sig(mlp_np(params, z) - offset)[0]


def ncnc1_ref(adj, h, i, j, params, offset=0.0):
    ni, nj = set(adj[i]), set(adj[j])
    pooled = np.zeros(h.shape[1])
    for u in sorted(ni | nj):
        if u in (i, j):
            continue
        if u in ni and u in nj:
            w = 1.0
        elif u in nj:
            w = ncn_ref(adj, h, i, u, params, offset)
        else:
            w = ncn_ref(adj, h, j, u, params, offset)
        pooled += w * h[u]
    z = np.concatenate([h[i] * h[j], pooled])[None]
    return sig(mlp_np(params, z))[0]


def adjacency_lists(g):
    return [g.neighbors(u).tolist() for u in range(g.n)]


def setup(seed, n=12, p=0.35, dim=4):
    rng = np.random.default_rng(seed)
    g = Graph.from_edge_list(random_graph(rng, n, p), n)
    h = rng.normal(size=(n, dim))
    params = init_predictor(2 * dim, [6], rng)
    return rng, g, h, params


def test_gae_examples():
    h = np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 3.0]])
    assert gae_score(h, 0, 1)[0] == 0.5
    np.testing.assert_allclose(gae_score(h, [0, 2], [2, 1]), sig(np.array([2.0, 3.0])))


def test_ncn_feature_g1(g1):
    rng = np.random.default_rng(0)
    h = rng.normal(size=(5, 3))
    assert not ncn_feature(g1, h, 3, 4).data.any()
    np.testing.assert_allclose(ncn_feature(g1, h, 0, 3).data[0], h[1] + h[2], rtol=1e-15)
    onehot = ncn_feature(g1, np.eye(5), 0, 3).data[0]
    assert onehot.tolist() == [0, 1, 1, 0, 0]


def test_ncn_matches_straight_line():
    for seed in range(5):
        rng, g, h, params = setup(seed)
        adj = adjacency_lists(g)
        pairs = rng.integers(g.n, size=(20, 2))
        got = ncn_score(g, h, pairs[:, 0], pairs[:, 1], params)
        want = [ncn_ref(adj, h, i, j, params) for i, j in pairs]
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


def test_ncnc1_matches_straight_line():
    for seed in range(5):
        rng, g, h, params = setup(seed)
        adj = adjacency_lists(g)
        pairs = rng.integers(g.n, size=(20, 2))
        got = ncnc_score(g, h, pairs[:, 0], pairs[:, 1], params, 1)
        want = [ncnc1_ref(adj, h, i, j, params) for i, j in pairs]
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-14)


def test_ncnc1_g1_straight_line(g1):
    rng = np.random.default_rng(3)
    h = rng.normal(size=(5, 4))
    params = init_predictor(8, [5], rng)
    got = ncnc_score(g1, h, 3, 4, params, 1)[0]
    assert got == pytest.approx(ncnc1_ref(adjacency_lists(g1), h, 3, 4, params), abs=1e-12)


def test_ncnc0_is_ncn_bitwise():
    rng, g, h, params = setup(11)
    pairs = rng.integers(g.n, size=(100, 2))
    a = ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 0).data
    b = ncn_logits(g, h, pairs[:, 0], pairs[:, 1], params).data
    assert np.array_equal(a, b)


def test_completion_weights_g1(g1):
    h = np.zeros((5, 2))
    cw = completion_probs(g1, h, 3, 4, lambda a, b: np.full(len(a), 0.25))
    assert cw.as_dict() == {1: 0.25, 2: 0.25}
    cw = completion_probs(g1, h, 0, 3, lambda a, b: np.full(len(a), 0.25))
    assert cw.as_dict() == {1: 1.0, 2: 1.0, 4: 0.25}  # 4 in N(3) - N(0)
    zero = completion_probs(g1, h, 1, 4, lambda a, b: np.zeros(len(a)))
    hard = {int(u): 1.0 for u in np.intersect1d(g1.neighbors(1), g1.neighbors(4))}
    assert {u: p for u, p in zero.as_dict().items() if p} == hard


def test_completion_scorer_receives_anchor(g1):
    seen = []

    def scorer(a, b):
        seen.extend(zip(a.tolist(), b.tolist()))
        return np.full(len(a), 0.5)

    completion_probs(g1, np.zeros((5, 1)), 1, 4, scorer)
    # N(4) - N(1) = {} besides 1 itself; N(1) - N(4) = {0, 2} scored against 4
    assert sorted(seen) == [(4, 0), (4, 2)]


def test_completion_with_zero_inner_equals_ncn():
    rng, g, h, params = setup(5)
    pairs = rng.integers(g.n, size=(30, 2))
    for i, j in pairs:
        cw = completion_probs(g, h, i, j, lambda a, b: np.zeros(len(a)))
        pooled = (cw.probs[:, None] * h[cw.nodes]).sum(axis=0)
        np.testing.assert_allclose(pooled, ncn_feature(g, h, i, j).data[0], atol=1e-12)
        assert np.all((0 <= cw.probs) & (cw.probs <= 1))


def test_variant_features(g1):
    h = np.eye(5)
    diff = ncn_variant_feature(g1, h, 1, 2, "ncn_diff").data[0]
    # N(1) - N(2) = {2}, N(2) - N(1) = {1}
    assert diff.tolist() == [0, 1, 1, 0, 0]
    assert not ncn_variant_feature(g1, h, 1, 1, "ncn_diff").data.any()
    path = Graph.from_edge_list([(0, 1), (1, 2), (2, 3)], 4)
    assert not ncn_feature(path, np.eye(4), 0, 3).data.any()
    two = ncn_variant_feature(path, np.eye(4), 0, 3, "ncn2").data[0]
    a = path.dense()
    a2 = a @ a
    np.fill_diagonal(a2, 0)
    want = ((a[0] > 0) & (a2[3] > 0)).astype(float) + ((a2[0] > 0) & (a[3] > 0))
    assert two.tolist() == want.tolist() == [0, 1, 1, 0]


def test_figure1_cycle_discrimination():
    g = Graph.from_edge_list(cycle(6), 6)
    model = init_link_model(1, "ncn", hidden=8, seed=0)
    x = np.ones((6, 1))
    h = model.embed(g, x).data
    a, c, d = 0, 2, 3
    assert abs(gae_score(h, a, c)[0] - gae_score(h, a, d)[0]) <= 1e-10
    za = ncn_feature(g, h, a, c).data
    zd = ncn_feature(g, h, a, d).data
    assert not np.allclose(za, zd)
    assert len(np.intersect1d(g.neighbors(a), g.neighbors(c))) == 1
    assert len(np.intersect1d(g.neighbors(a), g.neighbors(d))) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["ncn", "ncn_diff", "ncn2", "ncnc", "gae"]))
def test_scores_symmetric(seed, variant):
    rng = np.random.default_rng(seed)
    g = Graph.from_edge_list(random_graph(rng, 10, 0.35), 10)
    model = init_link_model(3, variant, hidden=4, mlp_hidden=4, seed=seed % 1000)
    x = rng.normal(size=(10, 3))
    pairs = rng.integers(10, size=(15, 2))
    a = model.predict_proba(g, x, pairs)
    b = model.predict_proba(g, x, pairs[:, ::-1])
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_zero_h_gives_constant_score():
    rng, g, _, params = setup(2)
    s = ncn_score(g, np.zeros((g.n, 4)), [0, 1, 2], [3, 4, 5], params)
    assert np.all(s == s[0])
    assert s[0] == pytest.approx(sig(mlp_np(params, np.zeros((1, 8))))[0])


def test_ncnc_gradients_through_inner_scores():
    rng, g, h0, params = setup(8, dim=3)
    h = ad.Tensor(h0, requires_grad=True)
    pairs = rng.integers(g.n, size=(8, 2))
    tensors = [h] + [t for _, t in params.named_parameters()]
    for k in (1, 2):
        assert check(lambda: ad.mean(ad.sigmoid(
            ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, k))), tensors) < 1e-5


def test_detached_completion_blocks_inner_gradient():
    rng, g, h, params = setup(9)
    pairs = rng.integers(g.n, size=(10, 2))
    grads = []
    for detach in (False, True):
        for _, t in params.named_parameters():
            t.zero_grad()
        tape = ad.Tape()
        with tape:
            loss = ad.mean(ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 1, detach))
        tape.backward(loss)
        grads.append(params.weights[0].grad.copy())
    assert not np.allclose(grads[0], grads[1])


def test_link_model_validation():
    model = init_link_model(3, "ncn", hidden=4)
    with pytest.raises(ValueError):
        LinkModel(model.mpnn, model.predictor, "seal")
    with pytest.raises(ValueError):
        LinkModel(model.mpnn, model.predictor, "ncn_diff")
    with pytest.raises(ValueError):
        LinkModel(model.mpnn, None, "ncn")
    with pytest.raises(ValueError):
        ncnc_logits(Graph.from_edge_list(G1_EDGES, 5), np.zeros((5, 4)), 0, 1,
                    model.predictor, -1)


def test_snapshot_restore():
    model = init_link_model(3, "ncnc", hidden=4, seed=1)
    snap = model.snapshot()
    for t in model.parameters():
        t.data += 1.0
    model.restore(snap)
    for t, s in zip(model.parameters(), snap):
        np.testing.assert_array_equal(t.data, s)


def test_completion_offset_shifts_inner_logits():
    rng, g, h, params = setup(21)
    adj = adjacency_lists(g)
    pairs = rng.integers(g.n, size=(20, 2))
    got = ad.sigmoid(ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 1,
                                 completion_offset=2.5)).data[:, 0]
    want = [ncnc1_ref(adj, h, int(i), int(j), params, 2.5) for i, j in pairs]
    np.testing.assert_allclose(got, want, atol=1e-12)
    # a huge offset silences completion, leaving plain NCN
    far = ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 1, completion_offset=800.0).data
    np.testing.assert_allclose(far, ncn_logits(g, h, pairs[:, 0], pairs[:, 1], params).data,
                               atol=1e-12)
    zero = ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 1, completion_offset=0.0).data
    assert np.array_equal(zero, ncnc_logits(g, h, pairs[:, 0], pairs[:, 1], params, 1).data)
